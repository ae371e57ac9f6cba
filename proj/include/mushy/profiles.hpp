#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "mushy/errors.hpp"
#include "mushy/field.hpp"
#include "mushy/noise.hpp"

namespace mushy {

/// Declarative description of a static field (initial data or forcing):
/// a sum of constants, trigonometric basis modes, and smooth periodic bumps.
/// The bump uses exp(-(sin²(π(x-cx)) + sin²(π(y-cy)))/w²), which is analytic
/// and exactly periodic.
struct FieldTerm {
    enum class Kind { Constant, Mode, Blob };
    Kind kind = Kind::Constant;
    double amplitude = 0.0;
    int k1 = 0, k2 = 0;      // Mode
    double width = 0.1;      // Blob
    double cx = 0.0, cy = 0.0;

    bool operator==(const FieldTerm&) const = default;
};

struct FieldSpec {
    std::vector<FieldTerm> terms;

    bool operator==(const FieldSpec&) const = default;

    bool is_zero() const {
        for (const FieldTerm& t : terms)
            if (t.amplitude != 0.0) return false;
        return true;
    }

    double eval(double x, double y) const {
        double v = 0.0;
        for (const FieldTerm& t : terms) {
            switch (t.kind) {
                case FieldTerm::Kind::Constant: v += t.amplitude; break;
                case FieldTerm::Kind::Mode: v += t.amplitude * basis_e({t.k1, t.k2}, x, y); break;
                case FieldTerm::Kind::Blob: {
                    const double s1 = std::sin(std::numbers::pi * (x - t.cx));
                    const double s2 = std::sin(std::numbers::pi * (y - t.cy));
                    v += t.amplitude * std::exp(-(s1 * s1 + s2 * s2) / (t.width * t.width));
                    break;
                }
            }
        }
        return v;
    }

    ScalarField build(const TorusGrid& g) const {
        return ScalarField::from_function(g, [this](double x, double y) { return eval(x, y); });
    }

    std::string to_string() const {
        if (terms.empty()) return "zero";
        std::ostringstream out;
        out.precision(17);
        for (size_t i = 0; i < terms.size(); ++i) {
            if (i) out << " + ";
            const FieldTerm& t = terms[i];
            switch (t.kind) {
                case FieldTerm::Kind::Constant: out << "constant " << t.amplitude; break;
                case FieldTerm::Kind::Mode:
                    out << "mode " << t.k1 << " " << t.k2 << " " << t.amplitude;
                    break;
                case FieldTerm::Kind::Blob:
                    out << "blob " << t.amplitude << " " << t.width << " " << t.cx << " " << t.cy;
                    break;
            }
        }
        return out.str();
    }

    static FieldSpec parse(const std::string& text) {
        FieldSpec spec;
        std::string piece;
        std::vector<std::string> pieces;
        std::string cur;
        for (char c : text) {
            if (c == '+') {
                pieces.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
        pieces.push_back(cur);
        for (const std::string& raw : pieces) {
            std::istringstream in(raw);
            std::string kind;
            if (!(in >> kind)) continue;
            auto want = [&](double& slot, const char* what) {
                if (!(in >> slot))
                    throw ConfigError("field term '" + raw + "': missing " + what);
            };
            if (kind == "zero") {
                continue;
            } else if (kind == "constant") {
                FieldTerm t;
                t.kind = FieldTerm::Kind::Constant;
                want(t.amplitude, "amplitude");
                spec.terms.push_back(t);
            } else if (kind == "mode") {
                FieldTerm t;
                t.kind = FieldTerm::Kind::Mode;
                if (!(in >> t.k1 >> t.k2)) throw ConfigError("field term '" + raw + "': missing wavevector");
                if (t.k1 == 0 && t.k2 == 0) throw ConfigError("field term '" + raw + "': zero mode; use constant");
                want(t.amplitude, "amplitude");
                spec.terms.push_back(t);
            } else if (kind == "blob") {
                FieldTerm t;
                t.kind = FieldTerm::Kind::Blob;
                want(t.amplitude, "amplitude");
                want(t.width, "width");
                want(t.cx, "center x");
                want(t.cy, "center y");
                if (t.width <= 0.0) throw ConfigError("field term '" + raw + "': width must be positive");
                spec.terms.push_back(t);
            } else {
                throw ConfigError("unknown field term kind '" + kind + "'");
            }
            std::string extra;
            if (in >> extra) throw ConfigError("field term '" + raw + "': trailing token '" + extra + "'");
        }
        return spec;
    }
};

}  // namespace mushy
