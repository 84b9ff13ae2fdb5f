#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "prr3/conditioning.hpp"
#include "prr3/geometry.hpp"

namespace prr3 {

enum class MatrixKind { ABar, B, KBar };

const char* matrix_kind_name(MatrixKind kind);
std::optional<MatrixKind> matrix_kind_from_name(std::string_view name);

struct SweepSpec {
    double x_min = -300.0, x_max = 300.0;  // mm
    double y_min = -300.0, y_max = 300.0;
    int nx = 101, ny = 101;
    int n_theta = 120;  // orientation samples over [0, 2*pi)
    MatrixKind matrix_kind = MatrixKind::KBar;
    WorkingMode mode{};
    double L = 0.0;  // characteristic length for A_bar / K_bar
    KappaVariant kappa_b_variant = KappaVariant::Ratio;
    bool refine_theta = false;  // golden-section polish around the grid argmax

    bool valid() const;
};

/// Orientation-optimized conditioning index per grid node, with reachability.
/// values/best_theta are NaN where unreachable; the mask is authoritative.
/// Storage is row-major with y outer: idx = iy*nx + ix.
struct SweepGrid {
    SweepSpec spec{};
    std::vector<double> values;
    std::vector<std::uint8_t> reachable;
    std::vector<double> best_theta;

    std::size_t idx(int ix, int iy) const { return static_cast<std::size_t>(iy) * spec.nx + ix; }
    double x_at(int ix) const;
    double y_at(int iy) const;
};

struct NodeValue {
    double index = 0.0;
    double best_theta = 0.0;
};

/// Max index over the theta samples at one position; nullopt when no
/// orientation is reachable in the requested mode. sweep() applies this to
/// every grid node; exposed so callers can query off-grid points.
std::optional<NodeValue> evaluate_node(const DesignParams& params, const SweepSpec& spec,
                                       double x, double y);

/// Deterministic: identical spec gives a bit-identical grid regardless of how
/// node evaluations are scheduled.
SweepGrid sweep(const DesignParams& params, const SweepSpec& spec);

using Polyline = std::vector<Vec2>;

struct IsoLoci {
    std::vector<double> levels;
    std::vector<std::vector<Polyline>> polylines;  // per level
};

/// Marching squares over the reachable cells with linear edge interpolation;
/// saddle cells resolve by the cell-average rule; segments are chained until
/// closed or they hit the mask/grid boundary. Levels must lie in (0,1)
/// (std::invalid_argument otherwise).
IsoLoci extract_isoloci(const SweepGrid& grid, const std::vector<double>& levels);

/// Mean index over reachable nodes; nullopt when the workspace is empty.
std::optional<double> global_index(const SweepGrid& grid);

/// Global index per (canonical mode class) x (matrix kind).
struct ModeComparison {
    std::array<WorkingMode, 2> modes{};
    std::array<std::array<double, 3>, 2> global{};  // columns: A_bar, B, K_bar
};

/// Runs six sweeps from the template spec (mode/matrix_kind overridden);
/// nullopt when any sweep has an empty workspace.
std::optional<ModeComparison> compare_modes(const DesignParams& params, SweepSpec spec);

// Serialization. precision = significant digits of numeric fields.
void write_grid_csv(const SweepGrid& grid, std::ostream& out, int precision = 6);
void write_grid_json(const SweepGrid& grid, std::ostream& out, int precision = 6);
void write_loci_json(const IsoLoci& loci, std::ostream& out, int precision = 6);
void write_loci_gnuplot(const IsoLoci& loci, std::ostream& out, int precision = 6);

}  // namespace prr3
