#pragma once

#include <filesystem>
#include <string>

#include "codetrail/event/canonical.hpp"
#include "codetrail/store/event_store.hpp"
#include "codetrail/store/ingest.hpp"

namespace codetrail::cli {

/// 16 hex chars of HMAC-SHA-256(salt, actor_id).
std::string pseudonym(const std::string& salt, const std::string& actor_id);

/// 16 hex chars of SHA-256 over a fixed prefix and the salt; identifies which
/// salt produced a bundle without revealing it.
std::string salt_fingerprint(const std::string& salt);

struct ExportOptions {
  store::EventFilter filter;
  std::string salt;
  /// Keep real identities. For backups and re-ingest into the same store only.
  bool raw = false;
};

/// A shareable dataset: `manifest` plus NDJSON of StoredEvent, one per line.
///
/// Unless raw, actor_id and workspace_id become salted pseudonyms, absolute paths
/// in diagnostic text and run commands become `<path>`, and event ids are
/// recomputed for the rewritten content with base_event_id links remapped to
/// match. Seqs and received_ts are kept. The manifest's created_ts is the
/// received_ts of the store's newest event, so the same store and salt always
/// give byte-identical bundles.
struct ExportBundle {
  json manifest;
  std::string events;
};

/// Throws Error{DirtyStore} unless the store verifies clean, and
/// Error{InvalidArgument} for a pseudonymized export without a salt.
ExportBundle export_bundle(const store::EventStore& store, const ExportOptions& options);

/// Writes `manifest.json` and `events.ndjson` into `dir`, creating it.
void write_bundle(const ExportBundle& bundle, const std::filesystem::path& dir);
/// Throws Error{MalformedBody} if the events disagree with the manifest.
ExportBundle read_bundle(const std::filesystem::path& dir);

/// Ingests a bundle's events (not their seqs) into a store. Importing the same
/// bundle again accepts nothing.
store::IngestReceipt import_bundle(store::IngestService& ingest, const ExportBundle& bundle);

}  // namespace codetrail::cli
