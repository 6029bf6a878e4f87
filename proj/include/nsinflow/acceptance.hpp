#ifndef NSINFLOW_ACCEPTANCE_HPP
#define NSINFLOW_ACCEPTANCE_HPP

#include <ostream>
#include <string>
#include <vector>

namespace nsinflow::acceptance {

// C_emp measured on the default run by the first build; later builds must not
// exceed it by more than 10%.
constexpr double kFrozenCEmp = 0.0028804929999760183;

struct Criterion {
    int id;
    const char* name;
    const char* summary;
};

const std::vector<Criterion>& criteria();

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

struct SuiteOptions {
    // Criterion names or ids; empty runs everything.
    std::vector<std::string> only;
    // Scratch space for the determinism check; a temporary directory if empty.
    std::string work_dir;
};

// Runs the selected criteria, printing one line per criterion as it finishes.
// Throws std::invalid_argument for an unknown name in `only`.
std::vector<CriterionResult> run_suite(const SuiteOptions& options, std::ostream& out);

// 0 when every selected criterion passes, 4 otherwise, 1 on a bad selection.
int cmd_verify(const SuiteOptions& options, std::ostream& out);

}  // namespace nsinflow::acceptance

#endif
