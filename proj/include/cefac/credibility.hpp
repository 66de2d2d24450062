#pragma once

#include <cstdint>
#include <vector>

#include "cefac/evidence.hpp"
#include "cefac/util.hpp"

namespace cefac {

/// A node's contribution to the consensus: the event support vector Y and the
/// Kronecker product X of Y with the node's evidence (rows indexed by event,
/// columns by non-empty subset).
struct NodeInitialState {
    FrameOfDiscernment frame;
    std::vector<double> Y;  // n supports, each in (0,1]
    Matrix X;               // n x (2^n - 1), row j = Y[j] * masses over non-empty subsets

    /// Flattened wire/consensus form: X row-major, then Y.
    std::vector<double> flatten() const;

    static std::size_t flat_length(std::size_t n_events) {
        return n_events * ((std::size_t{1} << n_events) - 1) + n_events;
    }
};

/// Credibility-weighted average evidence per conditioning event. Column j is
/// the weighted average mass function when event j is taken as decision-true.
class WavccmeMatrix {
public:
    static constexpr double kColumnSumTol = 1e-10;

    WavccmeMatrix(FrameOfDiscernment frame, Matrix columns_by_event);

    const FrameOfDiscernment& frame() const { return frame_; }
    /// (2^n - 1) x n; entry (a-1, j) is the mass of non-empty subset a under event j.
    const Matrix& values() const { return values_; }

    MassFunction column_as_mass(std::size_t event_index) const;

    bool operator==(const WavccmeMatrix&) const = default;

private:
    FrameOfDiscernment frame_;
    Matrix values_;
};

struct FusionResult {
    MassFunction m_fused;
    std::vector<double> event_probs;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Builds {Y, X} from a normalized mass function (supports via exp(-tau d)).
NodeInitialState build_initial_state(const MassFunction& m, double tau);

/// Row-normalizes a matrix of supports sup[j][i] into conditional
/// credibilities p(c_i | event_j). supports is n x N, rows sum to 1 after.
Matrix conditional_credibility(const Matrix& supports);

/// Assembles the WAVCCME from summed states: column j = X_sum row j / Y_sum[j].
/// X_sum is n x (2^n - 1). Throws ZeroSupport when a Y_sum entry is <= 0.
WavccmeMatrix assemble_wavccme(const FrameOfDiscernment& frame, const Matrix& x_sum,
                               const std::vector<double>& y_sum);

/// Convenience overload over a flattened summed state vector.
WavccmeMatrix assemble_wavccme(const FrameOfDiscernment& frame, const std::vector<double>& flat_sum);

/// Direct centralized evaluation: sum_i m_i (x) P(c_i|A). The oracle route.
WavccmeMatrix centralized_wavccme(const std::vector<MassFunction>& evidence, double tau);

/// m combined with itself `count` times under Dempster's rule; count 0 is m.
MassFunction n_fold_self_combine(const MassFunction& m, std::size_t count);

/// The local credible-fusion loop: iterate m_avg = W P, fuse |V_n|-1 fold,
/// P' = BetP(m_fused) until the event distribution moves by at most delta.
FusionResult iterative_fusion(const WavccmeMatrix& w, std::size_t n_nodes, double delta,
                              std::size_t max_iterations = 1000);

}  // namespace cefac
