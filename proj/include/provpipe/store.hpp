#pragma once

#include <filesystem>
#include <string>

#include "provpipe/bundle.hpp"

namespace provpipe {

/// Artifact directory layout (manifest version "1"):
///   manifest.json  sources, schemas, encoder states, matrix shape, matrix
///                  column provenance, model params, train config, per-file
///                  SHA-256 checksums
///   dprep.csv      prepared data, comma-delimited, "" encodes Null, lists
///                  joined by 0x1F
///   dprep.prov     one canonical row polynomial per line
///   X.f64le        feature matrix, row-major little-endian 64-bit floats
///   y.f64le        labels, same encoding
inline constexpr char kManifestVersion[] = "1";

struct SaveSummary {
    std::size_t files_written = 0;
    std::size_t bytes_written = 0;
};

/// The manifest JSON for a bundle (deterministic byte-for-byte). Also the
/// fingerprint input.
std::string manifest_string(const ArtifactBundle& bundle);

/// Validates the bundle, then writes the directory layout. Refuses to write
/// into a non-empty directory unless `overwrite` is set. Data is fsynced
/// before returning. Nothing is written when validation fails.
SaveSummary save_bundle(const ArtifactBundle& bundle, const std::filesystem::path& directory,
                        bool overwrite = false);

/// Reconstructs a bundle from a directory. Uses only the manifest plus the
/// files it references; verifies the manifest version and every checksum.
ArtifactBundle load_bundle(const std::filesystem::path& directory);

}  // namespace provpipe
