#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <string_view>

namespace defcon {

enum class HarmonicKind { constant, sine, cosine };

inline std::string_view to_string(HarmonicKind k) {
    switch (k) {
        case HarmonicKind::constant: return "constant";
        case HarmonicKind::sine: return "sin";
        case HarmonicKind::cosine: return "cos";
    }
    return "constant";
}

inline std::optional<HarmonicKind> parse_harmonic_kind(std::string_view s) {
    if (s == "constant") return HarmonicKind::constant;
    if (s == "sin") return HarmonicKind::sine;
    if (s == "cos") return HarmonicKind::cosine;
    return std::nullopt;
}

/// A + B·f(ωt) with f ∈ {1, sin, cos}, and its first two time derivatives.
/// For the constant family B and ω are ignored.
template <typename Scalar = double>
struct Harmonic {
    HarmonicKind kind = HarmonicKind::constant;
    Scalar offset = 0;     // A
    Scalar amplitude = 0;  // B
    Scalar omega = 0;      // ω

    static Harmonic constant(Scalar a) { return {HarmonicKind::constant, a, 0, 0}; }
    static Harmonic sine(Scalar a, Scalar b, Scalar w) { return {HarmonicKind::sine, a, b, w}; }
    static Harmonic cosine(Scalar a, Scalar b, Scalar w) { return {HarmonicKind::cosine, a, b, w}; }

    Scalar value(Scalar t) const {
        using std::cos;
        using std::sin;
        switch (kind) {
            case HarmonicKind::sine: return offset + amplitude * sin(omega * t);
            case HarmonicKind::cosine: return offset + amplitude * cos(omega * t);
            default: return offset;
        }
    }

    Scalar rate(Scalar t) const {
        using std::cos;
        using std::sin;
        switch (kind) {
            case HarmonicKind::sine: return amplitude * omega * cos(omega * t);
            case HarmonicKind::cosine: return -amplitude * omega * sin(omega * t);
            default: return 0;
        }
    }

    Scalar accel(Scalar t) const {
        switch (kind) {
            case HarmonicKind::constant: return 0;
            default: return -omega * omega * (value(t) - offset);
        }
    }

    /// Greatest lower bound of value(t) over all t.
    Scalar infimum() const {
        using std::abs;
        return kind == HarmonicKind::constant ? offset : offset - abs(amplitude);
    }

    bool operator==(const Harmonic&) const = default;
};

}  // namespace defcon
