#include "prr3/sweep.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <future>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>

namespace prr3 {

const char* matrix_kind_name(MatrixKind kind) {
    switch (kind) {
        case MatrixKind::ABar: return "A_bar";
        case MatrixKind::B: return "B";
        default: return "K_bar";
    }
}

std::optional<MatrixKind> matrix_kind_from_name(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "a" || lower == "a_bar" || lower == "abar") return MatrixKind::ABar;
    if (lower == "b") return MatrixKind::B;
    if (lower == "k" || lower == "k_bar" || lower == "kbar") return MatrixKind::KBar;
    return std::nullopt;
}

bool SweepSpec::valid() const {
    const bool needs_L = matrix_kind != MatrixKind::B;
    return nx >= 2 && ny >= 2 && n_theta >= 4 && x_max > x_min && y_max > y_min &&
           (!needs_L || L > 0.0);
}

double SweepGrid::x_at(int ix) const {
    return spec.x_min + ix * ((spec.x_max - spec.x_min) / (spec.nx - 1));
}

double SweepGrid::y_at(int iy) const {
    return spec.y_min + iy * ((spec.y_max - spec.y_min) / (spec.ny - 1));
}

namespace {

// Everything theta-dependent, precomputed once per sweep so the per-node loop
// is trig-free. platform_offset[k][i] is r*u(phi_i + theta_k); its quarter
// turn feeds k_i = l_i^T E (p - c_i) = -l_i^T E e_i since p - c_i = -e_i.
struct SweepContext {
    const DesignParams& params;
    const SweepSpec& spec;
    std::array<Vec2, 3> anchor;
    std::array<Vec2, 3> rail;
    std::vector<std::array<Vec2, 3>> platform_offset;
    std::vector<std::array<Vec2, 3>> platform_offset_rot;
    std::vector<double> thetas;

    SweepContext(const DesignParams& p, const SweepSpec& s) : params(p), spec(s) {
        for (int i = 0; i < 3; ++i) {
            anchor[i] = base_anchor(p, i);
            rail[i] = rail_direction(p, i);
        }
        thetas.resize(spec.n_theta);
        platform_offset.resize(spec.n_theta);
        platform_offset_rot.resize(spec.n_theta);
        for (int k = 0; k < spec.n_theta; ++k) {
            // 2*pi*k first, then one division: doubling n_theta then keeps
            // every old sample bit-identical, so refinement is monotone.
            thetas[k] = (2.0 * kPi * k) / spec.n_theta;
            set_offsets(thetas[k], &platform_offset[k], &platform_offset_rot[k]);
        }
    }

    void set_offsets(double theta, std::array<Vec2, 3>* offset,
                     std::array<Vec2, 3>* offset_rot) const {
        for (int i = 0; i < 3; ++i) {
            (*offset)[i] = params.r * unit_dir(params.platform_angles[i] + theta);
            (*offset_rot)[i] = rotate90((*offset)[i]);
        }
    }

    // Index of the selected matrix at one (position, theta); nullopt when the
    // pose is unreachable in the mode (tangency counts as unavailable).
    std::optional<double> index_at(Vec2 p, const std::array<Vec2, 3>& offset,
                                   const std::array<Vec2, 3>& offset_rot) const {
        const double l_sq = params.l * params.l;
        std::array<double, 3> m{};
        Mat3 mat;
        for (int i = 0; i < 3; ++i) {
            const Vec2 c = p + offset[i];
            const Vec2 d = c - anchor[i];
            const double a = d.dot(rail[i]);
            const double disc = a * a - d.norm_sq() + l_sq;
            if (disc <= 1e-14 * (a * a + d.norm_sq() + l_sq)) return std::nullopt;
            m[i] = spec.mode.signs[i] * std::sqrt(disc);
            if (spec.matrix_kind == MatrixKind::B) continue;
            const double rho = a - m[i];
            const Vec2 b = anchor[i] + rho * rail[i];
            const Vec2 l_vec = c - b;
            const double k = -l_vec.dot(offset_rot[i]);
            mat(i, 0) = l_vec.x;
            mat(i, 1) = l_vec.y;
            mat(i, 2) = -k / spec.L;
            if (spec.matrix_kind == MatrixKind::KBar)
                for (int j = 0; j < 3; ++j) mat(i, j) /= m[i];
        }
        if (spec.matrix_kind == MatrixKind::B) {
            const double lo = std::min({std::abs(m[0]), std::abs(m[1]), std::abs(m[2])});
            const double hi = std::max({std::abs(m[0]), std::abs(m[1]), std::abs(m[2])});
            const double ratio = lo / hi;
            return spec.kappa_b_variant == KappaVariant::Ratio ? ratio : std::sqrt(ratio);
        }
        return condition_report(mat).index;
    }

    std::optional<double> index_at_theta(Vec2 p, double theta) const {
        std::array<Vec2, 3> offset, offset_rot;
        set_offsets(theta, &offset, &offset_rot);
        return index_at(p, offset, offset_rot);
    }

    std::optional<NodeValue> eval(double x, double y) const {
        const Vec2 p{x, y};
        NodeValue best;
        bool reachable = false;
        int best_k = -1;
        for (int k = 0; k < spec.n_theta; ++k) {
            const auto index = index_at(p, platform_offset[k], platform_offset_rot[k]);
            if (!index) continue;
            if (!reachable || *index > best.index) {
                best.index = *index;
                best.best_theta = thetas[k];
                best_k = k;
                reachable = true;
            }
        }
        if (!reachable) return std::nullopt;
        if (spec.refine_theta) refine(p, best_k, &best);
        return best;
    }

    // Golden-section polish between the grid argmax's neighbors; only ever
    // raises the value.
    void refine(Vec2 p, int best_k, NodeValue* best) const {
        const double step = 2.0 * kPi / spec.n_theta;
        double lo = best->best_theta - step, hi = best->best_theta + step;
        auto value = [&](double theta) {
            const auto index = index_at_theta(p, theta);
            return index ? *index : -1.0;
        };
        const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
        double a = hi - inv_phi * (hi - lo), b = lo + inv_phi * (hi - lo);
        double fa = value(a), fb = value(b);
        for (int it = 0; it < 48; ++it) {
            if (fa < fb) {
                lo = a;
                a = b;
                fa = fb;
                b = lo + inv_phi * (hi - lo);
                fb = value(b);
            } else {
                hi = b;
                b = a;
                fb = fa;
                a = hi - inv_phi * (hi - lo);
                fa = value(a);
            }
        }
        const double theta = fa > fb ? a : b;
        const double refined = std::max(fa, fb);
        if (refined > best->index) {
            best->index = refined;
            best->best_theta = theta < 0.0            ? theta + 2.0 * kPi
                               : theta >= 2.0 * kPi ? theta - 2.0 * kPi
                                                    : theta;
        }
        (void)best_k;
    }
};

}  // namespace

std::optional<NodeValue> evaluate_node(const DesignParams& params, const SweepSpec& spec,
                                       double x, double y) {
    if (!spec.valid()) throw std::invalid_argument("invalid sweep spec");
    return SweepContext(params, spec).eval(x, y);
}

SweepGrid sweep(const DesignParams& params, const SweepSpec& spec) {
    if (!spec.valid()) throw std::invalid_argument("invalid sweep spec");

    SweepGrid grid;
    grid.spec = spec;
    const std::size_t n = static_cast<std::size_t>(spec.nx) * spec.ny;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    grid.values.assign(n, nan);
    grid.reachable.assign(n, 0);
    grid.best_theta.assign(n, nan);

    const SweepContext ctx(params, spec);
    auto run_rows = [&](int first_row, int stride) {
        for (int iy = first_row; iy < spec.ny; iy += stride) {
            const double y = grid.y_at(iy);
            for (int ix = 0; ix < spec.nx; ++ix) {
                const auto node = ctx.eval(grid.x_at(ix), y);
                if (!node) continue;
                const std::size_t at = grid.idx(ix, iy);
                grid.values[at] = node->index;
                grid.best_theta[at] = node->best_theta;
                grid.reachable[at] = 1;
            }
        }
    };

    const int jobs = std::max(1, std::min<int>(spec.ny, std::thread::hardware_concurrency()));
    if (jobs == 1) {
        run_rows(0, 1);
    } else {
        std::vector<std::future<void>> tasks;
        tasks.reserve(jobs);
        for (int j = 0; j < jobs; ++j)
            tasks.push_back(std::async(std::launch::async, run_rows, j, jobs));
        for (auto& t : tasks) t.get();
    }
    return grid;
}

namespace {

// A contour vertex lives on a grid edge; keying segments by edge identity
// makes chaining exact (shared vertices are computed once, no coordinate
// matching involved).
using EdgeKey = std::tuple<int, int, int>;  // (ix, iy, 0 = horizontal, 1 = vertical)

struct CellSegments {
    int count = 0;
    std::array<std::pair<int, int>, 2> pairs{};  // edge codes: 0=B, 1=R, 2=T, 3=L
};

CellSegments cell_case(int mask, bool center_above) {
    // mask bits: 1 = bottom-left, 2 = bottom-right, 4 = top-right, 8 = top-left.
    constexpr int B = 0, R = 1, T = 2, L = 3;
    CellSegments out;
    auto seg = [&](int a, int b) { out.pairs[out.count++] = {a, b}; };
    switch (mask) {
        case 1: case 14: seg(L, B); break;
        case 2: case 13: seg(B, R); break;
        case 3: case 12: seg(L, R); break;
        case 4: case 11: seg(T, R); break;
        case 6: case 9: seg(B, T); break;
        case 7: case 8: seg(L, T); break;
        case 5:
            if (center_above) { seg(B, R); seg(L, T); }
            else { seg(L, B); seg(T, R); }
            break;
        case 10:
            if (center_above) { seg(L, B); seg(T, R); }
            else { seg(B, R); seg(L, T); }
            break;
        default: break;  // 0 and 15: no crossing
    }
    return out;
}

struct LevelExtractor {
    const SweepGrid& grid;
    double level;
    std::map<EdgeKey, Vec2> edge_point;
    std::vector<std::pair<EdgeKey, EdgeKey>> segments;
    std::map<EdgeKey, std::vector<int>> by_edge;

    LevelExtractor(const SweepGrid& g, double lv) : grid(g), level(lv) {}

    Vec2 interpolate(int ix0, int iy0, int ix1, int iy1) const {
        const double v0 = grid.values[grid.idx(ix0, iy0)];
        const double v1 = grid.values[grid.idx(ix1, iy1)];
        const double t = (level - v0) / (v1 - v0);
        const Vec2 p0{grid.x_at(ix0), grid.y_at(iy0)};
        const Vec2 p1{grid.x_at(ix1), grid.y_at(iy1)};
        return p0 + t * (p1 - p0);
    }

    EdgeKey edge_key(int cell_x, int cell_y, int code) const {
        switch (code) {
            case 0: return {cell_x, cell_y, 0};          // bottom
            case 1: return {cell_x + 1, cell_y, 1};      // right
            case 2: return {cell_x, cell_y + 1, 0};      // top
            default: return {cell_x, cell_y, 1};         // left
        }
    }

    void ensure_point(const EdgeKey& key) {
        if (edge_point.count(key)) return;
        const auto [ix, iy, vertical] = key;
        edge_point[key] = vertical ? interpolate(ix, iy, ix, iy + 1)
                                   : interpolate(ix, iy, ix + 1, iy);
    }

    void scan() {
        for (int iy = 0; iy + 1 < grid.spec.ny; ++iy) {
            for (int ix = 0; ix + 1 < grid.spec.nx; ++ix) {
                const std::array<std::size_t, 4> corner{
                    grid.idx(ix, iy), grid.idx(ix + 1, iy), grid.idx(ix + 1, iy + 1),
                    grid.idx(ix, iy + 1)};
                bool masked = false;
                for (const std::size_t c : corner) masked = masked || !grid.reachable[c];
                if (masked) continue;

                int mask = 0;
                for (int b = 0; b < 4; ++b)
                    if (grid.values[corner[b]] > level) mask |= 1 << b;
                if (mask == 0 || mask == 15) continue;

                double avg = 0.0;
                for (const std::size_t c : corner) avg += grid.values[c] / 4.0;
                const CellSegments segs = cell_case(mask, avg > level);
                for (int s = 0; s < segs.count; ++s) {
                    const EdgeKey a = edge_key(ix, iy, segs.pairs[s].first);
                    const EdgeKey b = edge_key(ix, iy, segs.pairs[s].second);
                    ensure_point(a);
                    ensure_point(b);
                    const int id = static_cast<int>(segments.size());
                    segments.push_back({a, b});
                    by_edge[a].push_back(id);
                    by_edge[b].push_back(id);
                }
            }
        }
    }

    std::vector<Polyline> chain() {
        std::vector<Polyline> out;
        std::vector<bool> used(segments.size(), false);
        for (std::size_t start = 0; start < segments.size(); ++start) {
            if (used[start]) continue;
            used[start] = true;
            std::vector<EdgeKey> keys{segments[start].first, segments[start].second};

            // Grow at the tail, then flip and grow at the (old) head.
            for (int pass = 0; pass < 2; ++pass) {
                for (;;) {
                    const EdgeKey tail = keys.back();
                    int next = -1;
                    for (const int id : by_edge[tail])
                        if (!used[id]) next = id;
                    if (next < 0) break;
                    used[next] = true;
                    keys.push_back(segments[next].first == tail ? segments[next].second
                                                                : segments[next].first);
                    if (keys.back() == keys.front()) break;  // closed loop
                }
                if (keys.back() == keys.front() && keys.size() > 2) break;
                std::reverse(keys.begin(), keys.end());
            }

            Polyline line;
            line.reserve(keys.size());
            for (const EdgeKey& k : keys) line.push_back(edge_point.at(k));
            out.push_back(std::move(line));
        }
        return out;
    }
};

}  // namespace

IsoLoci extract_isoloci(const SweepGrid& grid, const std::vector<double>& levels) {
    for (const double level : levels)
        if (!(level > 0.0) || !(level < 1.0))
            throw std::invalid_argument("isoloci levels must lie in (0, 1)");

    IsoLoci loci;
    loci.levels = levels;
    loci.polylines.reserve(levels.size());
    for (const double level : levels) {
        LevelExtractor extractor(grid, level);
        extractor.scan();
        loci.polylines.push_back(extractor.chain());
    }
    return loci;
}

std::optional<double> global_index(const SweepGrid& grid) {
    // Kahan summation so the mean is insensitive to node order; grids related
    // by a symmetry then agree to the last couple of ulps, not just ~n*eps.
    double sum = 0.0, carry = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < grid.values.size(); ++i) {
        if (!grid.reachable[i]) continue;
        const double y = grid.values[i] - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
        ++count;
    }
    if (count == 0) return std::nullopt;
    return sum / static_cast<double>(count);
}

std::optional<ModeComparison> compare_modes(const DesignParams& params, SweepSpec spec) {
    ModeComparison cmp;
    cmp.modes = mode_catalog().representatives;
    const std::array<MatrixKind, 3> kinds{MatrixKind::ABar, MatrixKind::B, MatrixKind::KBar};
    for (int row = 0; row < 2; ++row) {
        for (int col = 0; col < 3; ++col) {
            spec.mode = cmp.modes[row];
            spec.matrix_kind = kinds[col];
            const auto mean = global_index(sweep(params, spec));
            if (!mean) return std::nullopt;
            cmp.global[row][col] = *mean;
        }
    }
    return cmp;
}

namespace {

// %.{precision}g with -0 folded to 0, so byte-identical reruns don't depend
// on signed zeros.
std::string fmt(double v, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", precision, v == 0.0 ? 0.0 : v);
    return buf;
}

}  // namespace

void write_grid_csv(const SweepGrid& grid, std::ostream& out, int precision) {
    out << "x_mm,y_mm,reachable,index,best_theta_rad\n";
    for (int iy = 0; iy < grid.spec.ny; ++iy) {
        for (int ix = 0; ix < grid.spec.nx; ++ix) {
            const std::size_t at = grid.idx(ix, iy);
            out << fmt(grid.x_at(ix), precision) << ',' << fmt(grid.y_at(iy), precision) << ',';
            if (grid.reachable[at])
                out << "1," << fmt(grid.values[at], precision) << ','
                    << fmt(grid.best_theta[at], precision) << '\n';
            else
                out << "0,,\n";
        }
    }
}

void write_grid_json(const SweepGrid& grid, std::ostream& out, int precision) {
    const SweepSpec& s = grid.spec;
    out << "{\n  \"spec\": {"
        << "\"x_min\": " << fmt(s.x_min, precision) << ", \"x_max\": " << fmt(s.x_max, precision)
        << ", \"y_min\": " << fmt(s.y_min, precision) << ", \"y_max\": " << fmt(s.y_max, precision)
        << ", \"nx\": " << s.nx << ", \"ny\": " << s.ny << ", \"n_theta\": " << s.n_theta
        << ", \"matrix\": \"" << matrix_kind_name(s.matrix_kind) << "\""
        << ", \"mode\": \"" << s.mode.to_string() << "\""
        << ", \"L_mm\": " << fmt(s.L, precision) << ", \"kappa_b\": \""
        << (s.kappa_b_variant == KappaVariant::Ratio ? "ratio" : "sqrt_ratio") << "\"},\n";

    auto row_array = [&](const char* name, auto emit_cell) {
        out << "  \"" << name << "\": [";
        for (int iy = 0; iy < s.ny; ++iy) {
            out << (iy ? ",\n    [" : "[");
            for (int ix = 0; ix < s.nx; ++ix) {
                if (ix) out << ", ";
                emit_cell(grid.idx(ix, iy));
            }
            out << "]";
        }
        out << "]";
    };

    out << "  \"x\": [";
    for (int ix = 0; ix < s.nx; ++ix) out << (ix ? ", " : "") << fmt(grid.x_at(ix), precision);
    out << "],\n  \"y\": [";
    for (int iy = 0; iy < s.ny; ++iy) out << (iy ? ", " : "") << fmt(grid.y_at(iy), precision);
    out << "],\n";

    row_array("values", [&](std::size_t at) {
        if (grid.reachable[at])
            out << fmt(grid.values[at], precision);
        else
            out << "null";
    });
    out << ",\n";
    row_array("reachable", [&](std::size_t at) { out << int(grid.reachable[at]); });
    out << ",\n";
    row_array("best_theta", [&](std::size_t at) {
        if (grid.reachable[at])
            out << fmt(grid.best_theta[at], precision);
        else
            out << "null";
    });
    out << "\n}\n";
}

void write_loci_json(const IsoLoci& loci, std::ostream& out, int precision) {
    out << "{\n  \"levels\": [";
    for (std::size_t i = 0; i < loci.levels.size(); ++i)
        out << (i ? ", " : "") << fmt(loci.levels[i], precision);
    out << "],\n  \"polylines\": [";
    for (std::size_t i = 0; i < loci.polylines.size(); ++i) {
        out << (i ? ",\n    [" : "[");
        for (std::size_t j = 0; j < loci.polylines[i].size(); ++j) {
            if (j) out << ", ";
            out << "[";
            const Polyline& line = loci.polylines[i][j];
            for (std::size_t v = 0; v < line.size(); ++v) {
                if (v) out << ", ";
                out << "[" << fmt(line[v].x, precision) << ", " << fmt(line[v].y, precision)
                    << "]";
            }
            out << "]";
        }
        out << "]";
    }
    out << "]\n}\n";
}

void write_loci_gnuplot(const IsoLoci& loci, std::ostream& out, int precision) {
    for (std::size_t i = 0; i < loci.levels.size(); ++i) {
        out << "# level " << fmt(loci.levels[i], precision) << "\n";
        for (const Polyline& line : loci.polylines[i]) {
            for (const Vec2& v : line)
                out << fmt(v.x, precision) << ' ' << fmt(v.y, precision) << '\n';
            out << '\n';
        }
    }
}

}  // namespace prr3
