#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace gridhub {

enum class Phase : int { A = 0, B = 1, C = 2 };

/// Non-empty subset of {A, B, C}. Serializes in canonical A<B<C order.
class PhaseSet {
  public:
    PhaseSet() = default;

    static PhaseSet abc() { return PhaseSet(0b111); }
    static PhaseSet single(Phase p) { return PhaseSet(uint8_t(1u << int(p))); }

    /// Parse a token like "ABC", "AB", "C". Throws ValidationError on
    /// empty, duplicate, out-of-order, or unknown letters.
    static PhaseSet parse(std::string_view text);

    bool has(Phase p) const { return bits_ & (1u << int(p)); }
    int count() const;
    bool empty() const { return bits_ == 0; }

    PhaseSet& add(Phase p) {
        bits_ |= uint8_t(1u << int(p));
        return *this;
    }

    bool is_subset_of(PhaseSet other) const { return (bits_ & ~other.bits_) == 0; }
    PhaseSet intersect(PhaseSet other) const { return PhaseSet(bits_ & other.bits_); }

    /// Members in canonical order.
    std::array<Phase, 3> members(int& n) const;

    std::string to_string() const;

    friend bool operator==(PhaseSet a, PhaseSet b) { return a.bits_ == b.bits_; }
    friend bool operator!=(PhaseSet a, PhaseSet b) { return a.bits_ != b.bits_; }

  private:
    explicit PhaseSet(uint8_t bits) : bits_(bits) {}
    uint8_t bits_ = 0;
};

inline constexpr std::array<Phase, 3> kAllPhases = {Phase::A, Phase::B, Phase::C};

/// "A" / "B" / "C"
std::string_view phase_name(Phase p);

}  // namespace gridhub
