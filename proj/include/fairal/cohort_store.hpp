#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fairal/surrogate.hpp"

namespace fairal {

// FNV-1a 64 of a file's bytes, as 16 lowercase hex digits.
std::string file_digest(const std::filesystem::path& path);

struct CohortCaseEntry {
    std::string case_id;
    GroupId group;
    std::string image_file; // relative to the cohort directory
    std::string truth_file;
    std::string image_digest;
    std::string truth_digest;
};

struct CohortManifest {
    int format_version = 1;
    std::string preset; // "strong", "weak", or "custom"
    CohortConfig config;
    std::vector<CohortCaseEntry> cases;
};

// Writes one image + one truth FVOL1 file per case plus cohort.json.
// Deterministic: the same cases and config produce byte-identical output.
CohortManifest save_cohort(const std::filesystem::path& dir,
                           const std::vector<Case>& cases,
                           const CohortConfig& cfg,
                           const std::string& preset);

struct LoadedCohort {
    CohortManifest manifest;
    std::vector<Case> cases;
};

// Throws DataError on a missing directory/manifest or digest mismatch.
LoadedCohort load_cohort(const std::filesystem::path& dir);

struct CohortSplit {
    std::vector<Case> train;
    std::vector<Case> test;
};

// Held-out test split: the last n_test_per_group cases of each group in
// case-id order; everything else is the training pool.
CohortSplit split_cohort(const std::vector<Case>& cases, std::size_t n_test_per_group);

} // namespace fairal
