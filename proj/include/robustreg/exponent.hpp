// Copyright 2026 The robustreg authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

namespace robustreg {

/// A norm exponent p in [1, inf], with inf represented symbolically so that
/// exponent arithmetic (duals, comparisons, 1/p) never touches floating inf.
class Exponent {
public:
    Exponent(double value) : value_(value), inf_(false) {
        if (!(value >= 1.0) || !std::isfinite(value))
            throw std::invalid_argument("Exponent: value must be finite and >= 1");
    }

    static Exponent infinity() {
        Exponent e;
        e.inf_ = true;
        return e;
    }

    bool is_inf() const { return inf_; }

    /// Finite value; only valid when !is_inf().
    double value() const {
        if (inf_) throw std::logic_error("Exponent: value() called on inf");
        return value_;
    }

    /// 1/p with the convention 1/inf = 0.
    double reciprocal() const { return inf_ ? 0.0 : 1.0 / value_; }

    /// Conjugate exponent p* with 1/p + 1/p* = 1.
    Exponent dual() const {
        if (inf_) return Exponent(1.0);
        if (value_ == 1.0) return infinity();
        return Exponent(value_ / (value_ - 1.0));
    }

    bool is_one() const { return !inf_ && value_ == 1.0; }

    friend bool operator==(const Exponent& a, const Exponent& b) {
        return a.inf_ == b.inf_ && (a.inf_ || a.value_ == b.value_);
    }
    friend bool operator!=(const Exponent& a, const Exponent& b) { return !(a == b); }
    friend bool operator<(const Exponent& a, const Exponent& b) {
        return !a.inf_ && (b.inf_ || a.value_ < b.value_);
    }
    friend bool operator>(const Exponent& a, const Exponent& b) { return b < a; }
    friend bool operator<=(const Exponent& a, const Exponent& b) { return !(b < a); }
    friend bool operator>=(const Exponent& a, const Exponent& b) { return !(a < b); }

    std::string str() const {
        if (inf_) return "inf";
        std::ostringstream os;
        os << value_;
        return os.str();
    }

    /// Parse "inf"/"Inf"/"oo" or a decimal number >= 1.
    static Exponent parse(const std::string& s) {
        if (s == "inf" || s == "Inf" || s == "INF" || s == "oo") return infinity();
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("Exponent: cannot parse '" + s + "'");
        return Exponent(v);
    }

private:
    Exponent() : value_(0.0), inf_(true) {}

    double value_;
    bool inf_;
};

inline Exponent dual_exponent(const Exponent& p) { return p.dual(); }

}  // namespace robustreg
