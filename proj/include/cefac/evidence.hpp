#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cefac/errors.hpp"

namespace cefac {

/// Finite set of mutually exclusive, exhaustive event labels.
///
/// Subsets of the frame are addressed by bitmask: bit k set means event k is
/// a member; mask 0 is the empty set. Frames are capped at 16 events so the
/// power set stays addressable by a 32-bit mask.
class FrameOfDiscernment {
public:
    explicit FrameOfDiscernment(std::vector<std::string> events);

    std::size_t size() const { return events_.size(); }
    std::size_t subset_count() const { return std::size_t{1} << events_.size(); }
    std::uint32_t full_mask() const { return static_cast<std::uint32_t>(subset_count() - 1); }
    const std::vector<std::string>& events() const { return events_; }
    const std::string& event_label(std::size_t index) const;

    /// Label of a subset: member labels joined by '|' in frame order; "" for the
    /// empty set.
    std::string subset_label(std::uint32_t mask) const;

    /// Inverse of subset_label. Throws InvalidFrame for unknown labels.
    std::uint32_t subset_from_label(const std::string& label) const;

    bool operator==(const FrameOfDiscernment&) const = default;

private:
    std::vector<std::string> events_;
};

/// Basic belief assignment over the power set of a frame.
///
/// masses[mask] is the belief committed exactly to that subset; masses[0] is
/// the mass on the empty set, carried explicitly so normalization is
/// expressible. All masses lie in [0,1] and sum to 1 within kMassSumTol.
class MassFunction {
public:
    static constexpr double kMassSumTol = 1e-12;

    MassFunction(FrameOfDiscernment frame, std::vector<double> masses);

    /// All mass on the full frame: the vacuous ("know nothing") evidence.
    static MassFunction vacuous(const FrameOfDiscernment& frame);

    const FrameOfDiscernment& frame() const { return frame_; }
    const std::vector<double>& masses() const { return masses_; }
    double mass(std::uint32_t subset_mask) const { return masses_.at(subset_mask); }
    double empty_mass() const { return masses_[0]; }

    /// m(∅) = 0 within tolerance.
    bool is_normalized() const { return masses_[0] <= kMassSumTol; }

    bool operator==(const MassFunction&) const = default;

private:
    FrameOfDiscernment frame_;
    std::vector<double> masses_;
};

/// Redistributes the mass on the empty set proportionally over the rest.
/// Throws DegenerateMass when m(∅) = 1 (nothing left to renormalize).
MassFunction normalize(const MassFunction& m);

/// Degree of conflict K: total product mass on disjoint subset pairs.
double conflict_degree(const MassFunction& m1, const MassFunction& m2);

/// Dempster's rule: conjunctive combination renormalized by 1-K.
/// Throws TotalConflict when K = 1 within 1e-12.
MassFunction dempster_combine(const MassFunction& m1, const MassFunction& m2);

/// Pignistic transform: splits each subset's mass equally among its members.
/// Requires a normalized input; returns a probability vector over the events.
std::vector<double> betp(const MassFunction& m);

/// Categorical evidence asserting one event: all mass on {event}.
MassFunction event_evidence(const FrameOfDiscernment& frame, std::size_t event_index);

/// Jousselme distance with the Jaccard similarity matrix over non-empty
/// subsets: sqrt(0.5 (v1-v2)^T D (v1-v2)), D(A,B) = |A∩B|/|A∪B|. Bounded in
/// [0,1]; zero iff the mass vectors coincide.
double evidence_distance(const MassFunction& m1, const MassFunction& m2);

/// Support of m for event j: exp(-tau * distance to the event evidence).
double support(const MassFunction& m, std::size_t event_index, double tau);

/// Index of the most probable event under the pignistic transform.
std::size_t betp_decision(const MassFunction& m);

}  // namespace cefac
