#include "prr3/geometry.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace prr3 {

namespace {

std::array<double, 3> spaced_angles(double first) {
    return {first, first + 2.0 * kPi / 3.0, first + 4.0 * kPi / 3.0};
}

void check_limb(int limb) {
    if (limb < 0 || limb >= 3) throw std::out_of_range("limb index must be 0, 1, or 2");
}

}  // namespace

DesignParams default_params() {
    DesignParams p;
    p.R = 200.0;
    p.l = 200.0;
    p.r = 100.0;
    p.base_angles = spaced_angles(kPi / 2.0);
    p.platform_angles = spaced_angles(kPi / 2.0);
    for (int i = 0; i < 3; ++i) p.rail_angles[i] = p.base_angles[i] + kPi / 2.0;
    return p;
}

std::optional<WorkingMode> WorkingMode::from_string(std::string_view s) {
    if (s.size() != 3) return std::nullopt;
    WorkingMode mode;
    for (int i = 0; i < 3; ++i) {
        if (s[i] == '+')
            mode.signs[i] = +1;
        else if (s[i] == '-')
            mode.signs[i] = -1;
        else
            return std::nullopt;
    }
    return mode;
}

std::string WorkingMode::to_string() const {
    std::string out(3, '?');
    for (int i = 0; i < 3; ++i) out[i] = signs[i] > 0 ? '+' : '-';
    return out;
}

Vec2 base_anchor(const DesignParams& params, int limb) {
    check_limb(limb);
    return params.R * unit_dir(params.base_angles[limb]);
}

Vec2 rail_direction(const DesignParams& params, int limb) {
    check_limb(limb);
    return unit_dir(params.rail_angles[limb]);
}

Vec2 platform_attach(const DesignParams& params, const Pose& pose, int limb) {
    check_limb(limb);
    return Vec2{pose.x, pose.y} + params.r * unit_dir(params.platform_angles[limb] + pose.theta);
}

ModeCatalog mode_catalog() {
    ModeCatalog catalog;
    auto index_of = [](const WorkingMode& m) {
        // Bit i set when sign i is negative: "+++" -> 0, "---" -> 7.
        int idx = 0;
        for (int i = 0; i < 3; ++i)
            if (m.signs[i] < 0) idx |= 1 << i;
        return idx;
    };
    for (int idx = 0; idx < 8; ++idx) {
        WorkingMode m;
        for (int i = 0; i < 3; ++i) m.signs[i] = (idx >> i) & 1 ? -1 : +1;
        ModeCatalogEntry entry;
        entry.mode = m;
        entry.negation = index_of(m.negated());
        entry.rotated120 = index_of(m.rotated120());
        entry.rotated240 = index_of(m.rotated120().rotated120());
        const bool uniform = m.signs[0] == m.signs[1] && m.signs[1] == m.signs[2];
        entry.symmetry_class = uniform ? 0 : 1;
        catalog.entries[idx] = entry;
    }
    catalog.representatives[0] = WorkingMode{{+1, +1, +1}};
    catalog.representatives[1] = WorkingMode{{-1, +1, +1}};
    return catalog;
}

std::string to_json(const DesignParams& params, int precision) {
    std::ostringstream out;
    out << std::setprecision(precision);
    auto angles = [&](const std::array<double, 3>& a) {
        std::ostringstream s;
        s << std::setprecision(precision);
        s << "[" << a[0] << ", " << a[1] << ", " << a[2] << "]";
        return s.str();
    };
    out << "{\n"
        << "  \"R_mm\": " << params.R << ",\n"
        << "  \"l_mm\": " << params.l << ",\n"
        << "  \"r_mm\": " << params.r << ",\n"
        << "  \"base_angles_rad\": " << angles(params.base_angles) << ",\n"
        << "  \"platform_angles_rad\": " << angles(params.platform_angles) << ",\n"
        << "  \"rail_angles_rad\": " << angles(params.rail_angles) << "\n"
        << "}\n";
    return out.str();
}

DesignParams params_from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(std::string("invalid parameter JSON: ") + e.what());
    }
    if (!doc.is_object()) throw std::runtime_error("parameter JSON must be an object");

    DesignParams params;
    auto length = [&](const char* key) {
        if (!doc.contains(key)) throw std::runtime_error(std::string("missing key: ") + key);
        const auto& v = doc.at(key);
        if (!v.is_number()) throw std::runtime_error(std::string(key) + " must be a number");
        const double x = v.get<double>();
        if (!(x > 0.0) || !std::isfinite(x))
            throw std::runtime_error(std::string(key) + " must be positive and finite");
        return x;
    };
    params.R = length("R_mm");
    params.l = length("l_mm");
    params.r = length("r_mm");

    auto angles = [&](const char* key, std::array<double, 3> fallback) {
        if (!doc.contains(key)) return fallback;
        const auto& v = doc.at(key);
        if (!v.is_array() || v.size() != 3)
            throw std::runtime_error(std::string(key) + " must be an array of 3 numbers");
        std::array<double, 3> out{};
        for (int i = 0; i < 3; ++i) {
            if (!v[i].is_number())
                throw std::runtime_error(std::string(key) + " must be an array of 3 numbers");
            out[i] = v[i].get<double>();
            if (!std::isfinite(out[i]))
                throw std::runtime_error(std::string(key) + " entries must be finite");
        }
        return out;
    };
    params.base_angles = angles("base_angles_rad", spaced_angles(kPi / 2.0));
    params.platform_angles = angles("platform_angles_rad", spaced_angles(kPi / 2.0));
    std::array<double, 3> rail_fallback{};
    for (int i = 0; i < 3; ++i) rail_fallback[i] = params.base_angles[i] + kPi / 2.0;
    params.rail_angles = angles("rail_angles_rad", rail_fallback);

    for (const auto& item : doc.items()) {
        static const char* known[] = {"R_mm",           "l_mm",
                                      "r_mm",           "base_angles_rad",
                                      "platform_angles_rad", "rail_angles_rad"};
        bool ok = false;
        for (const char* k : known) ok = ok || item.key() == k;
        if (!ok) throw std::runtime_error("unknown key in parameter JSON: " + item.key());
    }
    return params;
}

DesignParams load_params_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open parameter file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return params_from_json(buf.str());
}

}  // namespace prr3
