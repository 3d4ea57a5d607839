#include "gridhub/phases.hpp"

#include "gridhub/errors.hpp"

namespace gridhub {

PhaseSet PhaseSet::parse(std::string_view text) {
    PhaseSet s;
    int last = -1;
    for (char c : text) {
        int p;
        switch (c) {
            case 'A': p = 0; break;
            case 'B': p = 1; break;
            case 'C': p = 2; break;
            default:
                throw ValidationError("invalid phase letter '" + std::string(1, c) +
                                      "' in \"" + std::string(text) + "\"");
        }
        if (p <= last)
            throw ValidationError("phases must be unique and in A<B<C order: \"" +
                                  std::string(text) + "\"");
        last = p;
        s.add(Phase(p));
    }
    if (s.empty()) throw ValidationError("phase set must not be empty");
    return s;
}

int PhaseSet::count() const {
    int n = 0;
    for (Phase p : kAllPhases)
        if (has(p)) ++n;
    return n;
}

std::array<Phase, 3> PhaseSet::members(int& n) const {
    std::array<Phase, 3> out{};
    n = 0;
    for (Phase p : kAllPhases)
        if (has(p)) out[n++] = p;
    return out;
}

std::string PhaseSet::to_string() const {
    std::string s;
    for (Phase p : kAllPhases)
        if (has(p)) s += char('A' + int(p));
    return s;
}

std::string_view phase_name(Phase p) {
    switch (p) {
        case Phase::A: return "A";
        case Phase::B: return "B";
        default: return "C";
    }
}

}  // namespace gridhub
