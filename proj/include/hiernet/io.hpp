#pragma once

#include "hiernet/evaluation.hpp"
#include "hiernet/types.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace hiernet {

/// Malformed input file; message carries the 1-based line number.
struct ParseError : Error {
    using Error::Error;
};

/// JSON document missing required fields; message lists them.
struct SchemaError : Error {
    using Error::Error;
};

/// CSV with header "y,x1,...,xN". Rejects NaN/Inf and malformed rows with the
/// offending line number. Numeric output uses round-trip precision.
Dataset read_dataset(const std::filesystem::path& path,
                     SplitRole role = SplitRole::Train);
void write_dataset(const Dataset& data, const std::filesystem::path& path);

/// JSON document {n, v_plus, v_minus, theta} with theta row-major.
void write_model(const ModelParams& params, const std::filesystem::path& path);
ModelParams read_model(const std::filesystem::path& path);

/// CSV columns: iter,objective,iterate_change,dist_to_symmetry,elapsed_seconds.
void write_trace(const SolveReport& report, const std::filesystem::path& path);
std::vector<SolveReport::Record> read_trace(const std::filesystem::path& path);

/// CSV columns: lambda,train_mean,train_std,val_mean,val_std,test_mean,
/// test_std,n_ok,is_best.
void write_cv(const CvResult& result, const std::filesystem::path& path);

/// Reproducibility sidecar written next to every CLI output: a config
/// snapshot, library version, seed, creation timestamp, and checksums of the
/// input files. Round-trips losslessly through JSON.
struct RunManifest {
    std::string library_version;
    std::string created_utc;
    std::uint64_t seed = 0;
    std::string config_json;  // serialized snapshot of every config in effect
    std::map<std::string, std::string> input_checksums;

    bool operator==(const RunManifest&) const = default;
};

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path);
RunManifest read_manifest(const std::filesystem::path& path);

/// FNV-1a 64-bit checksum of the file bytes, lowercase hex.
std::string file_checksum_hex(const std::filesystem::path& path);

inline constexpr char kVersion[] = "0.1.0";

}  // namespace hiernet
