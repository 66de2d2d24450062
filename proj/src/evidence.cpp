#include "cefac/evidence.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>
#include <sstream>

namespace cefac {

namespace {

void require_same_frame(const MassFunction& a, const MassFunction& b) {
    if (!(a.frame() == b.frame())) {
        throw FrameMismatch("mass functions are defined on different frames");
    }
}

}  // namespace

FrameOfDiscernment::FrameOfDiscernment(std::vector<std::string> events) : events_(std::move(events)) {
    if (events_.size() < 2) {
        throw InvalidFrame("frame needs at least two events");
    }
    if (events_.size() > 16) {
        throw InvalidFrame("frame is capped at 16 events (bitmask width)");
    }
    std::set<std::string> seen(events_.begin(), events_.end());
    if (seen.size() != events_.size()) {
        throw InvalidFrame("frame labels must be unique");
    }
}

const std::string& FrameOfDiscernment::event_label(std::size_t index) const {
    if (index >= events_.size()) {
        throw IndexOutOfRange("event index " + std::to_string(index) + " out of range");
    }
    return events_[index];
}

std::string FrameOfDiscernment::subset_label(std::uint32_t mask) const {
    std::string out;
    for (std::size_t k = 0; k < events_.size(); ++k) {
        if (mask & (1u << k)) {
            if (!out.empty()) out += '|';
            out += events_[k];
        }
    }
    return out;
}

std::uint32_t FrameOfDiscernment::subset_from_label(const std::string& label) const {
    if (label.empty()) return 0;
    std::uint32_t mask = 0;
    std::stringstream ss(label);
    std::string part;
    while (std::getline(ss, part, '|')) {
        auto it = std::find(events_.begin(), events_.end(), part);
        if (it == events_.end()) {
            throw InvalidFrame("unknown event label '" + part + "'");
        }
        mask |= 1u << static_cast<std::uint32_t>(it - events_.begin());
    }
    return mask;
}

MassFunction::MassFunction(FrameOfDiscernment frame, std::vector<double> masses)
    : frame_(std::move(frame)), masses_(std::move(masses)) {
    if (masses_.size() != frame_.subset_count()) {
        throw InvalidMass("mass vector length must be 2^n");
    }
    double sum = 0.0;
    for (double v : masses_) {
        if (!(v >= -kMassSumTol) || !(v <= 1.0 + kMassSumTol)) {
            throw InvalidMass("mass values must lie in [0,1]");
        }
        sum += v;
    }
    if (std::abs(sum - 1.0) > kMassSumTol) {
        throw InvalidMass("masses must sum to 1, got " + std::to_string(sum));
    }
    // Clear float dust so downstream exact comparisons behave.
    for (double& v : masses_) {
        if (v < 0.0) v = 0.0;
        if (v > 1.0) v = 1.0;
    }
}

MassFunction MassFunction::vacuous(const FrameOfDiscernment& frame) {
    std::vector<double> masses(frame.subset_count(), 0.0);
    masses.back() = 1.0;
    return MassFunction(frame, std::move(masses));
}

MassFunction normalize(const MassFunction& m) {
    const double empty = m.empty_mass();
    if (empty <= MassFunction::kMassSumTol) {
        return m;
    }
    if (empty >= 1.0 - MassFunction::kMassSumTol) {
        throw DegenerateMass("all mass on the empty set; normalization undefined");
    }
    double tail = 0.0;
    for (std::size_t a = 1; a < m.masses().size(); ++a) tail += m.masses()[a];
    std::vector<double> out(m.masses().size(), 0.0);
    const double scale = 1.0 / tail;
    for (std::size_t a = 1; a < out.size(); ++a) {
        out[a] = m.masses()[a] * scale;
    }
    return MassFunction(m.frame(), std::move(out));
}

double conflict_degree(const MassFunction& m1, const MassFunction& m2) {
    require_same_frame(m1, m2);
    const std::size_t count = m1.frame().subset_count();
    double k = 0.0;
    for (std::uint32_t b = 0; b < count; ++b) {
        const double mb = m1.masses()[b];
        if (mb == 0.0) continue;
        for (std::uint32_t c = 0; c < count; ++c) {
            if ((b & c) == 0) k += mb * m2.masses()[c];
        }
    }
    return k;
}

MassFunction dempster_combine(const MassFunction& m1, const MassFunction& m2) {
    require_same_frame(m1, m2);
    const std::size_t count = m1.frame().subset_count();
    std::vector<double> conv(count, 0.0);
    for (std::uint32_t b = 0; b < count; ++b) {
        const double mb = m1.masses()[b];
        if (mb == 0.0) continue;
        for (std::uint32_t c = 0; c < count; ++c) {
            conv[b & c] += mb * m2.masses()[c];
        }
    }
    if (conv[0] >= 1.0 - 1e-12) {
        throw TotalConflict("total conflict (K = 1); Dempster's rule undefined");
    }
    // Normalize by the exact surviving mass rather than 1-K so repeated
    // combination cannot drift away from a unit sum.
    double tail = 0.0;
    for (std::size_t a = 1; a < count; ++a) tail += conv[a];
    std::vector<double> out(count, 0.0);
    const double scale = 1.0 / tail;
    for (std::size_t a = 1; a < count; ++a) {
        out[a] = conv[a] * scale;
    }
    return MassFunction(m1.frame(), std::move(out));
}

std::vector<double> betp(const MassFunction& m) {
    if (m.empty_mass() > MassFunction::kMassSumTol) {
        throw SubnormalInput("pignistic transform requires a normalized mass function");
    }
    const std::size_t n = m.frame().size();
    std::vector<double> probs(n, 0.0);
    for (std::uint32_t a = 1; a < m.frame().subset_count(); ++a) {
        const double share = m.masses()[a] / static_cast<double>(std::popcount(a));
        if (share == 0.0) continue;
        for (std::size_t j = 0; j < n; ++j) {
            if (a & (1u << j)) probs[j] += share;
        }
    }
    return probs;
}

MassFunction event_evidence(const FrameOfDiscernment& frame, std::size_t event_index) {
    if (event_index >= frame.size()) {
        throw IndexOutOfRange("event index " + std::to_string(event_index) + " out of range");
    }
    std::vector<double> masses(frame.subset_count(), 0.0);
    masses[std::size_t{1} << event_index] = 1.0;
    return MassFunction(frame, std::move(masses));
}

double evidence_distance(const MassFunction& m1, const MassFunction& m2) {
    require_same_frame(m1, m2);
    const std::size_t count = m1.frame().subset_count();
    std::vector<double> diff(count, 0.0);
    for (std::size_t a = 1; a < count; ++a) {
        diff[a] = m1.masses()[a] - m2.masses()[a];
    }
    double quad = 0.0;
    for (std::uint32_t a = 1; a < count; ++a) {
        if (diff[a] == 0.0) continue;
        for (std::uint32_t b = 1; b < count; ++b) {
            if (diff[b] == 0.0) continue;
            const double jaccard =
                static_cast<double>(std::popcount(a & b)) / static_cast<double>(std::popcount(a | b));
            quad += diff[a] * jaccard * diff[b];
        }
    }
    return std::sqrt(0.5 * std::max(quad, 0.0));
}

double support(const MassFunction& m, std::size_t event_index, double tau) {
    if (!(tau > 0.0)) {
        throw NonpositiveTau("distance coefficient tau must be positive");
    }
    const double d = evidence_distance(m, event_evidence(m.frame(), event_index));
    return std::exp(-tau * d);
}

std::size_t betp_decision(const MassFunction& m) {
    const auto probs = betp(m);
    std::size_t best = 0;
    for (std::size_t j = 1; j < probs.size(); ++j) {
        if (probs[j] > probs[best]) best = j;
    }
    return best;
}

}  // namespace cefac
