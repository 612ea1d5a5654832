#pragma once

#include <string>

#include "koopman/pipeline.hpp"

namespace koopman {

/// Malformed or inconsistent on-disk data; the message names the field.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// Writes `prefix`.json plus `prefix`_states.bin (and _derivatives.bin when
/// present). Binaries are little-endian float64, column-major; the manifest
/// records dims, dt, normalization, provenance and an fnv1a64 checksum.
void export_snapshots(const SnapshotSet& set, const std::string& prefix);

/// Reads a manifest written by export_snapshots (or produced externally in
/// the same schema) and validates dims and checksums.
SnapshotSet ingest(const std::string& manifest_path);

/// Model JSON with complex numbers encoded as [re, im] pairs.
void export_model(const KoopmanModel& model, const std::string& path);
KoopmanModel import_model(const std::string& path);

std::string fnv1a64_hex(const char* data, size_t size);

}  // namespace koopman
