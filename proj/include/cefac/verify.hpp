#pragma once

#include <string>
#include <vector>

namespace cefac::verify {

struct CheckResult {
    std::string id;
    std::string name;
    bool passed = false;
    std::string details;
    double seconds = 0.0;
};

/// The acceptance checks, oracle-equivalence and property based. Each returns
/// one pass/fail result with a short evidence string.
CheckResult c1_dempster_oracle();
CheckResult c2_summed_state_identity();
CheckResult c3_sum_preservation();
CheckResult c4_honest_convergence();
CheckResult c5_attack_convergence();
CheckResult c6_attacker_identification();
CheckResult c7_privacy();
CheckResult c8_paillier();
CheckResult c9_high_conflict();
CheckResult c10_robustness_checkers();

/// suite: evidence | consensus | privacy | robustness | all
std::vector<CheckResult> run_suite(const std::string& suite);

std::string format_result(const CheckResult& r);

}  // namespace cefac::verify
