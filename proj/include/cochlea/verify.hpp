#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace cochlea {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
};

struct AcceptanceOptions {
    std::string cache_dir;      // reuse trained nets / LUTs across runs
    std::uint64_t seed = 1;     // RBF training seed
    std::vector<int> only;      // run this subset (empty = all)
};

// Runs the acceptance criteria, printing one PASS/FAIL line per criterion.
// Criteria 1-4 run the full-scale pipeline (N=1000, fs=200 kHz); simulation
// criteria use reduced line configurations noted in each detail string.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opts,
                                            std::ostream& log);

bool all_passed(const std::vector<CriterionResult>& results);

}  // namespace cochlea
