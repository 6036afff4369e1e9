#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace sievelab {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string details;
    double seconds = 0.0;
};

// Runs the full acceptance suite with its pinned desk-scale parameters,
// printing one PASS/FAIL line per criterion. Artifacts (grid dumps, reports,
// rollup manifest) land in out_dir. Returns the per-criterion results.
std::vector<CriterionResult> run_acceptance(const std::filesystem::path& out_dir,
                                            unsigned threads);

}  // namespace sievelab
