#pragma once

#include <string>
#include <vector>

namespace hosgd::cli {

struct VerifyResult {
    std::string property;
    bool pass = false;
    std::string witness;  // filled on failure (and sometimes on pass, as info)
};

/// Runs every module's invariant suite at the given level and returns the
/// per-property results. `full` raises Monte-Carlo sample counts to 10^5.
std::vector<VerifyResult> run_verification(bool full);

/// Prints the pass/fail table; exit 0 iff everything passed.
int cmd_verify(bool full);

}  // namespace hosgd::cli
