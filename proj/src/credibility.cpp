#include "cefac/credibility.hpp"

#include <cmath>
#include <string>

namespace cefac {

std::vector<double> NodeInitialState::flatten() const {
    std::vector<double> out;
    out.reserve(X.data.size() + Y.size());
    out.insert(out.end(), X.data.begin(), X.data.end());
    out.insert(out.end(), Y.begin(), Y.end());
    return out;
}

WavccmeMatrix::WavccmeMatrix(FrameOfDiscernment frame, Matrix columns_by_event)
    : frame_(std::move(frame)), values_(std::move(columns_by_event)) {
    const std::size_t n = frame_.size();
    const std::size_t rows = frame_.subset_count() - 1;
    if (values_.rows != rows || values_.cols != n) {
        throw InvalidMass("WAVCCME must be (2^n - 1) x n");
    }
    for (std::size_t j = 0; j < n; ++j) {
        double sum = 0.0;
        for (std::size_t a = 0; a < rows; ++a) {
            const double v = values_.at(a, j);
            if (v < -kColumnSumTol) {
                throw InvalidMass("WAVCCME column " + std::to_string(j) + " has a negative mass");
            }
            sum += v;
        }
        if (std::abs(sum - 1.0) > kColumnSumTol) {
            throw InvalidMass("WAVCCME column " + std::to_string(j) + " does not sum to 1");
        }
    }
}

MassFunction WavccmeMatrix::column_as_mass(std::size_t event_index) const {
    if (event_index >= frame_.size()) {
        throw IndexOutOfRange("event index out of range");
    }
    std::vector<double> masses(frame_.subset_count(), 0.0);
    double sum = 0.0;
    for (std::size_t a = 1; a < frame_.subset_count(); ++a) {
        double v = values_.at(a - 1, event_index);
        if (v < 0.0) v = 0.0;  // dust from consensus roundoff
        masses[a] = v;
        sum += v;
    }
    for (std::size_t a = 1; a < masses.size(); ++a) {
        masses[a] /= sum;
    }
    return MassFunction(frame_, std::move(masses));
}

NodeInitialState build_initial_state(const MassFunction& m, double tau) {
    if (!m.is_normalized()) {
        throw SubnormalInput("initial state requires a normalized mass function");
    }
    const std::size_t n = m.frame().size();
    const std::size_t cols = m.frame().subset_count() - 1;
    NodeInitialState state{m.frame(), std::vector<double>(n, 0.0), Matrix(n, cols)};
    for (std::size_t j = 0; j < n; ++j) {
        state.Y[j] = support(m, j, tau);
        for (std::size_t a = 1; a <= cols; ++a) {
            state.X.at(j, a - 1) = state.Y[j] * m.masses()[a];
        }
    }
    return state;
}

Matrix conditional_credibility(const Matrix& supports) {
    if (supports.rows == 0 || supports.cols == 0) {
        throw EmptyInput("support matrix is empty");
    }
    Matrix cred(supports.rows, supports.cols);
    for (std::size_t j = 0; j < supports.rows; ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < supports.cols; ++i) {
            const double s = supports.at(j, i);
            if (!(s > 0.0)) {
                throw InvalidMass("supports must be positive");
            }
            sum += s;
        }
        for (std::size_t i = 0; i < supports.cols; ++i) {
            cred.at(j, i) = supports.at(j, i) / sum;
        }
    }
    return cred;
}

WavccmeMatrix assemble_wavccme(const FrameOfDiscernment& frame, const Matrix& x_sum,
                               const std::vector<double>& y_sum) {
    const std::size_t n = frame.size();
    const std::size_t cols = frame.subset_count() - 1;
    if (x_sum.rows != n || x_sum.cols != cols || y_sum.size() != n) {
        throw InvalidMass("summed state has wrong dimensions for the frame");
    }
    for (double y : y_sum) {
        if (!(y > 0.0)) {
            throw ZeroSupport("summed event support must be positive");
        }
    }
    Matrix w(cols, n);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t a = 0; a < cols; ++a) {
            w.at(a, j) = x_sum.at(j, a) / y_sum[j];
        }
    }
    return WavccmeMatrix(frame, std::move(w));
}

WavccmeMatrix assemble_wavccme(const FrameOfDiscernment& frame, const std::vector<double>& flat_sum) {
    const std::size_t n = frame.size();
    const std::size_t cols = frame.subset_count() - 1;
    if (flat_sum.size() != NodeInitialState::flat_length(n)) {
        throw InvalidMass("flattened state has wrong length for the frame");
    }
    Matrix x(n, cols);
    std::copy(flat_sum.begin(), flat_sum.begin() + static_cast<std::ptrdiff_t>(n * cols), x.data.begin());
    std::vector<double> y(flat_sum.end() - static_cast<std::ptrdiff_t>(n), flat_sum.end());
    return assemble_wavccme(frame, x, y);
}

WavccmeMatrix centralized_wavccme(const std::vector<MassFunction>& evidence, double tau) {
    if (evidence.empty()) {
        throw EmptyInput("no evidence to fuse");
    }
    const auto& frame = evidence.front().frame();
    for (const auto& m : evidence) {
        if (!(m.frame() == frame)) {
            throw FrameMismatch("evidence pieces are on different frames");
        }
    }
    const std::size_t n = frame.size();
    const std::size_t subsets = frame.subset_count() - 1;
    const std::size_t n_evidence = evidence.size();

    Matrix supports(n, n_evidence);
    for (std::size_t i = 0; i < n_evidence; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            supports.at(j, i) = support(evidence[i], j, tau);
        }
    }
    const Matrix cred = conditional_credibility(supports);

    Matrix w(subsets, n, 0.0);
    for (std::size_t i = 0; i < n_evidence; ++i) {
        for (std::size_t a = 1; a <= subsets; ++a) {
            const double mass = evidence[i].masses()[a];
            if (mass == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) {
                w.at(a - 1, j) += mass * cred.at(j, i);
            }
        }
    }
    return WavccmeMatrix(frame, std::move(w));
}

MassFunction n_fold_self_combine(const MassFunction& m, std::size_t count) {
    MassFunction acc = m;
    for (std::size_t i = 0; i < count; ++i) {
        acc = dempster_combine(acc, m);
    }
    return acc;
}

FusionResult iterative_fusion(const WavccmeMatrix& w, std::size_t n_nodes, double delta,
                              std::size_t max_iterations) {
    if (n_nodes < 1) {
        throw EmptyInput("fusion needs at least one contributing node");
    }
    if (!(delta > 0.0)) {
        throw InvalidMass("termination threshold delta must be positive");
    }
    const auto& frame = w.frame();
    const std::size_t n = frame.size();
    const std::size_t subsets = frame.subset_count() - 1;

    // Uniform event prior: total ignorance at the start of the iteration.
    std::vector<double> prior(n, 1.0 / static_cast<double>(n));

    for (std::size_t iter = 1; iter <= max_iterations; ++iter) {
        std::vector<double> masses(frame.subset_count(), 0.0);
        double sum = 0.0;
        for (std::size_t a = 1; a <= subsets; ++a) {
            double v = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                v += w.values().at(a - 1, j) * prior[j];
            }
            if (v < 0.0) v = 0.0;
            masses[a] = v;
            sum += v;
        }
        for (std::size_t a = 1; a <= subsets; ++a) {
            masses[a] /= sum;
        }
        MassFunction m_avg(frame, std::move(masses));
        MassFunction m_fused = n_fold_self_combine(m_avg, n_nodes - 1);
        std::vector<double> probs = betp(m_fused);

        double dist2 = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double d = probs[j] - prior[j];
            dist2 += d * d;
        }
        if (std::sqrt(dist2) <= delta) {
            return FusionResult{std::move(m_fused), std::move(probs), iter, true};
        }
        prior = std::move(probs);
    }
    throw NoConvergence("credible fusion did not converge within " + std::to_string(max_iterations) +
                        " iterations");
}

}  // namespace cefac
