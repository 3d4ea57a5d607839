#include "gridhub/numtext.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>

namespace gridhub {

std::string format_double(double v) {
    if (v == 0) return "0"; // collapse -0
    char buf[40];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::string format_fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    std::string s = buf;
    if (s[0] == '-' && s.find_first_of("123456789") == std::string::npos)
        s.erase(0, 1); // "-0.000" is still zero
    return s;
}

std::string format_complex(Complex z) {
    std::string s = format_double(z.real());
    double im = z.imag();
    s += (std::signbit(im) && im != 0) ? '-' : '+';
    s += format_double(std::abs(im));
    s += 'j';
    return s;
}

std::optional<double> parse_double(std::string_view text) {
    if (!text.empty() && text.front() == '+') text.remove_prefix(1); // from_chars rejects '+'
    if (text.empty()) return std::nullopt;
    double v = 0;
    auto r = std::from_chars(text.data(), text.data() + text.size(), v);
    if (r.ec != std::errc{} || r.ptr != text.data() + text.size()) return std::nullopt;
    if (!std::isfinite(v)) return std::nullopt;
    return v;
}

std::optional<Complex> parse_complex(std::string_view text) {
    if (text.size() < 2 || text.back() != 'j') return std::nullopt;
    std::string_view body = text.substr(0, text.size() - 1);
    // Split at the sign that separates real and imaginary parts: the last
    // '+'/'-' not at position 0 and not an exponent sign.
    size_t split = std::string_view::npos;
    for (size_t i = body.size(); i-- > 1;) {
        char c = body[i];
        if ((c == '+' || c == '-') && body[i - 1] != 'e' && body[i - 1] != 'E') {
            split = i;
            break;
        }
    }
    if (split == std::string_view::npos) return std::nullopt;
    auto re = parse_double(body.substr(0, split));
    auto im = parse_double(body.substr(split));
    if (!re || !im) return std::nullopt;
    return Complex(*re, *im);
}

double shortest_within(double x, double rel_tol) {
    if (x == 0) return 0;
    char buf[40];
    for (int sig = 1; sig <= 15; ++sig) {
        int n = std::snprintf(buf, sizeof buf, "%.*g", sig, x);
        double cand = 0;
        auto r = std::from_chars(buf, buf + n, cand);
        if (r.ec != std::errc{}) continue;
        if (std::abs(cand - x) <= rel_tol * std::abs(x)) return cand;
    }
    return x;
}

}  // namespace gridhub
