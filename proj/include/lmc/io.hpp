#pragma once

#include <string>

#include "lmc/types.hpp"

namespace lmc {

enum class FileFormat { csv, jsonl };

struct LoadOptions {
    // Reject coordinates outside [-1,1]. The CLI exposes --no-normalize-check
    // to disable it for data normalized by camera intrinsics.
    bool check_range = true;
};

// CSV: header "x,y,u,v[,label][,f0..f{d-1}]", '.' decimal separator.
// JSONL: one object per line, keys x/y/u/v, optional "label", "features".
// Errors carry the 1-based line number of the offending row.
CorrespondenceSet load_correspondences(const std::string& path, FileFormat format,
                                       const LoadOptions& opts = {});

// Full-precision output: doubles are written with shortest round-trip
// decimal form, so save followed by load reproduces values bit-exactly.
void save_correspondences(const std::string& path, const CorrespondenceSet& set,
                          FileFormat format);

// Prune output: columns index, residual, inlier (CSV), or one JSON object
// per row (JSONL).
void save_prune_result(const std::string& path, const PruneResult& result, FileFormat format);

FileFormat format_from_name(const std::string& name);  // "csv" | "jsonl"

// Shortest decimal form that parses back to the same 64-bit double.
std::string format_double(double v);

}  // namespace lmc
