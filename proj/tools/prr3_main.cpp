#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "prr3/geometry.hpp"
#include "prr3/isotropy.hpp"
#include "prr3/kinematics.hpp"
#include "prr3/singularity.hpp"
#include "prr3/sweep.hpp"

namespace {

using namespace prr3;

// Domain failures (unreachable pose, no convergence, empty workspace) exit 2;
// usage problems exit 1 via CLI11's ParseError path.
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::optional<std::array<double, 3>> parse_triple(const std::string& text) {
    std::array<double, 3> out{};
    std::istringstream in(text);
    for (int i = 0; i < 3; ++i) {
        if (!(in >> out[i])) return std::nullopt;
        if (i < 2) {
            char comma = 0;
            if (!(in >> comma) || comma != ',') return std::nullopt;
        }
    }
    char extra = 0;
    if (in >> extra) return std::nullopt;
    return out;
}

std::optional<std::vector<double>> parse_list(const std::string& text) {
    std::vector<double> out;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) return std::nullopt;
        } catch (const std::exception&) {
            return std::nullopt;
        }
    }
    if (out.empty()) return std::nullopt;
    return out;
}

const CLI::Validator kTripleValidator(
    [](std::string& s) {
        return parse_triple(s) ? std::string{}
                               : std::string("expected three comma-separated numbers (x,y,theta)");
    },
    "X,Y,THETA");

const CLI::Validator kModeValidator(
    [](std::string& s) {
        return WorkingMode::from_string(s)
                   ? std::string{}
                   : std::string("expected three signs, e.g. +++ or -+-");
    },
    "MODE");

const CLI::Validator kMatrixValidator(
    [](std::string& s) {
        return matrix_kind_from_name(s) ? std::string{}
                                        : std::string("expected one of: A, B, K");
    },
    "MATRIX");

const CLI::Validator kLevelsValidator(
    [](std::string& s) {
        const auto levels = parse_list(s);
        if (!levels) return std::string("expected comma-separated numbers");
        for (const double v : *levels)
            if (!(v > 0.0) || !(v < 1.0)) return std::string("levels must lie in (0,1)");
        return std::string{};
    },
    "LEVELS");

struct Shared {
    std::string params_path;
    int precision = 6;

    DesignParams params() const {
        return params_path.empty() ? default_params() : load_params_file(params_path);
    }

    std::string num(double v) const {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.*g", precision, v == 0.0 ? 0.0 : v);
        return buf;
    }
};

Pose pose_from(const std::string& s) {
    const auto t = *parse_triple(s);
    return {t[0], t[1], t[2]};
}

WorkingMode mode_from(const std::string& s) { return *WorkingMode::from_string(s); }

void add_common(CLI::App* cmd, Shared& shared) {
    cmd->fallthrough();
    cmd->add_option("--params", shared.params_path,
                    "JSON file with design parameters (default: built-in R=200, l=200, r=100)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--precision", shared.precision, "significant digits in numeric output")
        ->check(CLI::Range(1, 17))
        ->capture_default_str();
}

double default_or(double flag_value, const CLI::Option* opt, double fallback) {
    return opt->count() ? flag_value : fallback;
}

const char* describe(IkStatus status) {
    switch (status) {
        case IkStatus::Unreachable: return "unreachable";
        case IkStatus::ModeUnavailable: return "mode unavailable (serial singularity)";
        default: return "ok";
    }
}

const char* describe(SingularityClass c) {
    switch (c) {
        case SingularityClass::Regular: return "regular";
        case SingularityClass::SerialSingular: return "serial";
        case SingularityClass::ParallelSingular: return "parallel";
        default: return "both";
    }
}

void print_matrix(const Shared& shared, const char* name, const Mat3& m) {
    std::cout << name << ":\n";
    for (int i = 0; i < 3; ++i) {
        std::cout << " ";
        for (int j = 0; j < 3; ++j) std::cout << " " << shared.num(m(i, j));
        std::cout << "\n";
    }
}

std::string matrix_json(const Shared& shared, const Mat3& m) {
    std::string out = "[";
    for (int i = 0; i < 3; ++i) {
        out += i ? ", [" : "[";
        for (int j = 0; j < 3; ++j) {
            if (j) out += ", ";
            out += shared.num(m(i, j));
        }
        out += "]";
    }
    return out + "]";
}

void register_ik(CLI::App& app, Shared& shared) {
    auto* cmd = app.add_subcommand("ik", "Inverse kinematics: joint displacements at a pose");
    add_common(cmd, shared);
    auto pose_s = std::make_shared<std::string>();
    auto mode_s = std::make_shared<std::string>("+++");
    cmd->add_option("--pose", *pose_s, "end-effector pose x,y,theta (mm,mm,rad)")
        ->required()
        ->check(kTripleValidator);
    cmd->add_option("--mode", *mode_s, "working mode sign triple")
        ->check(kModeValidator)
        ->capture_default_str();
    cmd->callback([&shared, pose_s, mode_s] {
        const DesignParams params = shared.params();
        const IkResult ik =
            inverse_kinematics(params, pose_from(*pose_s), mode_from(*mode_s));
        if (!ik.ok())
            throw DomainError("limb " + std::to_string(ik.limb + 1) + ": " +
                              describe(ik.status));
        std::cout << "limb  rho_mm  m_mm  gamma_rad\n";
        for (int i = 0; i < 3; ++i)
            std::cout << i + 1 << "  " << shared.num(ik.limbs[i].rho) << "  "
                      << shared.num(ik.limbs[i].m) << "  " << shared.num(ik.limbs[i].gamma)
                      << "\n";
    });
}

void register_dk(CLI::App& app, Shared& shared) {
    auto* cmd = app.add_subcommand("dk", "Direct kinematics: pose from joint displacements");
    add_common(cmd, shared);
    auto rho_s = std::make_shared<std::string>();
    auto seed_s = std::make_shared<std::string>("0,0,0");
    cmd->add_option("--rho", *rho_s, "joint displacements rho1,rho2,rho3 (mm)")
        ->required()
        ->check(kTripleValidator);
    cmd->add_option("--seed", *seed_s, "Newton seed pose x,y,theta")
        ->check(kTripleValidator)
        ->capture_default_str();
    cmd->callback([&shared, rho_s, seed_s] {
        const DesignParams params = shared.params();
        const auto rho = *parse_triple(*rho_s);
        const DkResult dk = direct_kinematics(params, rho, pose_from(*seed_s));
        if (!dk.ok()) {
            const char* why = dk.status == DkStatus::SingularSystem
                                  ? "singular Newton system"
                                  : "no convergence";
            throw DomainError(std::string(why) + " (residual " + shared.num(dk.residual) +
                              " mm after " + std::to_string(dk.iterations) + " iterations)");
        }
        std::cout << "x_mm = " << shared.num(dk.pose.x) << "\n"
                  << "y_mm = " << shared.num(dk.pose.y) << "\n"
                  << "theta_rad = " << shared.num(dk.pose.theta) << "\n"
                  << "iterations = " << dk.iterations << "\n"
                  << "residual_mm = " << shared.num(dk.residual) << "\n";
    });
}

void register_jacobians(CLI::App& app, Shared& shared) {
    auto* cmd = app.add_subcommand("jacobians", "Kinematic matrices at a pose");
    add_common(cmd, shared);
    auto pose_s = std::make_shared<std::string>();
    auto mode_s = std::make_shared<std::string>("+++");
    auto L = std::make_shared<double>(0.0);
    auto as_json = std::make_shared<bool>(false);
    cmd->add_option("--pose", *pose_s, "end-effector pose x,y,theta")
        ->required()
        ->check(kTripleValidator);
    cmd->add_option("--mode", *mode_s, "working mode sign triple")
        ->check(kModeValidator)
        ->capture_default_str();
    auto* l_opt = cmd->add_option("--L", *L, "characteristic length, mm (default sqrt(2)*r)")
                      ->check(CLI::PositiveNumber);
    cmd->add_flag("--json", *as_json, "emit matrices as row-major JSON arrays");
    cmd->callback([&shared, pose_s, mode_s, L, as_json, l_opt] {
        const DesignParams params = shared.params();
        const double char_len = default_or(*L, l_opt, std::sqrt(2.0) * params.r);
        const IkResult ik =
            inverse_kinematics(params, pose_from(*pose_s), mode_from(*mode_s));
        if (!ik.ok())
            throw DomainError("limb " + std::to_string(ik.limb + 1) + ": " +
                              describe(ik.status));
        const KinematicMatrices mats = assemble_matrices(ik.limbs, char_len);
        if (*as_json) {
            std::cout << "{\"L_mm\": " << shared.num(char_len)
                      << ", \"A\": " << matrix_json(shared, mats.a)
                      << ", \"B\": " << matrix_json(shared, mats.b)
                      << ", \"A_bar\": " << matrix_json(shared, mats.a_bar) << ", \"K_bar\": "
                      << (mats.k_bar ? matrix_json(shared, *mats.k_bar) : "null")
                      << ", \"J\": " << (mats.j ? matrix_json(shared, *mats.j) : "null")
                      << "}\n";
            return;
        }
        std::cout << "L_mm = " << shared.num(char_len) << "\n";
        print_matrix(shared, "A", mats.a);
        print_matrix(shared, "B", mats.b);
        print_matrix(shared, "A_bar", mats.a_bar);
        if (mats.k_bar)
            print_matrix(shared, "K_bar", *mats.k_bar);
        else
            std::cout << "K_bar: undefined (serial singularity)\n";
        if (mats.j)
            print_matrix(shared, "J", *mats.j);
        else
            std::cout << "J: undefined (parallel singularity)\n";
    });
}

void register_classify(CLI::App& app, Shared& shared) {
    auto* cmd = app.add_subcommand("classify", "Singularity classification at a pose");
    add_common(cmd, shared);
    auto pose_s = std::make_shared<std::string>();
    auto mode_s = std::make_shared<std::string>("+++");
    auto L = std::make_shared<double>(0.0);
    cmd->add_option("--pose", *pose_s, "end-effector pose x,y,theta")
        ->required()
        ->check(kTripleValidator);
    cmd->add_option("--mode", *mode_s, "working mode sign triple")
        ->check(kModeValidator)
        ->capture_default_str();
    auto* l_opt = cmd->add_option("--L", *L, "characteristic length, mm (default sqrt(2)*r)")
                      ->check(CLI::PositiveNumber);
    cmd->callback([&shared, pose_s, mode_s, L, l_opt] {
        const DesignParams params = shared.params();
        const double char_len = default_or(*L, l_opt, std::sqrt(2.0) * params.r);
        const ClassifyResult result =
            classify(params, pose_from(*pose_s), mode_from(*mode_s), char_len);
        if (!result.ok())
            throw DomainError("limb " + std::to_string(result.limb + 1) + ": " +
                              describe(result.status));
        std::cout << "classification = " << describe(result.report.classification) << "\n"
                  << "parallel_measure = " << shared.num(result.report.parallel_measure) << "\n"
                  << "serial_measure = " << shared.num(result.report.serial_measure) << "\n";
        std::cout << "serial_limbs =";
        bool any = false;
        for (int i = 0; i < 3; ++i)
            if (result.report.serial_limbs[i]) {
                std::cout << " " << i + 1;
                any = true;
            }
        std::cout << (any ? "\n" : " none\n");
    });
}

void print_search(const Shared& shared, const IsotropySearchResult& result) {
    std::cout << "x_mm = " << shared.num(result.pose.x) << "\n"
              << "y_mm = " << shared.num(result.pose.y) << "\n"
              << "theta_rad = " << shared.num(result.pose.theta) << "\n"
              << "L_mm = " << shared.num(result.char_len.L) << "\n"
              << "gamma_rad = " << shared.num(result.char_len.gamma) << "\n"
              << "index = " << shared.num(result.index) << "\n"
              << "claimed = " << (result.claimed ? "yes" : "no") << "\n"
              << "structural_ok = " << (result.structural_ok ? "yes" : "no") << "\n";
    if (result.seed_index >= 0) std::cout << "seed_index = " << result.seed_index << "\n";
    if (result.iterations_to_claim >= 0)
        std::cout << "iterations_to_claim = " << result.iterations_to_claim << "\n";
}

void register_charlen(CLI::App& app, Shared& shared) {
    auto* cmd = app.add_subcommand(
        "charlen", "Characteristic length: closed form (--gamma) or via isotropy search");
    add_common(cmd, shared);
    auto gamma = std::make_shared<double>(0.0);
    auto mode_s = std::make_shared<std::string>("+++");
    auto L_init = std::make_shared<double>(0.0);
    auto* gamma_opt = cmd->add_option("--gamma", *gamma, "limb angle gamma, rad");
    cmd->add_option("--mode", *mode_s, "working mode for the search path")
        ->check(kModeValidator)
        ->capture_default_str();
    auto* li_opt =
        cmd->add_option("--L-init", *L_init, "search starting L, mm (default sqrt(2)*r)")
            ->check(CLI::PositiveNumber);
    cmd->callback([&shared, gamma, mode_s, L_init, gamma_opt, li_opt] {
        const DesignParams params = shared.params();
        if (gamma_opt->count()) {
            const auto closed = characteristic_length_closed(params.r, *gamma);
            if (!closed) throw DomainError("sin(gamma) must be positive for a real length");
            std::cout << "L_mm = " << shared.num(closed->L) << "\n";
            return;
        }
        const double init = default_or(*L_init, li_opt, std::sqrt(2.0) * params.r);
        print_search(shared, find_isotropic(params, mode_from(*mode_s), init));
    });
}

void register_isotropy(CLI::App& app, Shared& shared) {
    auto* cmd = app.add_subcommand("isotropy", "Search for an isotropic configuration");
    add_common(cmd, shared);
    auto mode_s = std::make_shared<std::string>("+++");
    auto L_init = std::make_shared<double>(0.0);
    auto seed_s = std::make_shared<std::string>();
    auto target_s = std::make_shared<std::string>("K");
    cmd->add_option("--mode", *mode_s, "working mode sign triple")
        ->check(kModeValidator)
        ->capture_default_str();
    auto* li_opt =
        cmd->add_option("--L-init", *L_init, "search starting L, mm (default sqrt(2)*r)")
            ->check(CLI::PositiveNumber);
    auto* seed_opt = cmd->add_option("--seed", *seed_s, "run a single search from this x,y,theta")
                         ->check(kTripleValidator);
    cmd->add_option("--target", *target_s, "matrix whose conditioning is optimized (K or A)")
        ->check(CLI::IsMember({"K", "A"}))
        ->capture_default_str();
    cmd->callback([&shared, mode_s, L_init, seed_s, target_s, li_opt, seed_opt] {
        const DesignParams params = shared.params();
        const double init = default_or(*L_init, li_opt, std::sqrt(2.0) * params.r);
        const IsotropyTarget target =
            *target_s == "A" ? IsotropyTarget::ABar : IsotropyTarget::KBar;
        const WorkingMode mode = mode_from(*mode_s);
        const IsotropySearchResult result =
            seed_opt->count()
                ? refine_isotropic(params, mode, pose_from(*seed_s), init, target)
                : find_isotropic(params, mode, init, target);
        print_search(shared, result);
    });
}

void register_sweep(CLI::App& app, Shared& shared) {
    auto* cmd = app.add_subcommand(
        "sweep", "Workspace sweep: orientation-optimized conditioning index per grid node");
    add_common(cmd, shared);
    struct Flags {
        SweepSpec spec;
        std::string mode = "+++";
        std::string matrix = "K";
        std::string kappa_b = "ratio";
        std::string levels;
        std::string format = "csv";
        std::string grid_out;
        std::string loci_out;
    };
    auto flags = std::make_shared<Flags>();
    cmd->add_option("--mode", flags->mode, "working mode sign triple")
        ->check(kModeValidator)
        ->capture_default_str();
    cmd->add_option("--matrix", flags->matrix, "matrix whose index is mapped: A, B, or K")
        ->check(kMatrixValidator)
        ->capture_default_str();
    cmd->add_option("--xmin", flags->spec.x_min, "grid x minimum, mm")->capture_default_str();
    cmd->add_option("--xmax", flags->spec.x_max, "grid x maximum, mm")->capture_default_str();
    cmd->add_option("--ymin", flags->spec.y_min, "grid y minimum, mm")->capture_default_str();
    cmd->add_option("--ymax", flags->spec.y_max, "grid y maximum, mm")->capture_default_str();
    cmd->add_option("--nx", flags->spec.nx, "grid nodes in x")
        ->check(CLI::Range(2, 4001))
        ->capture_default_str();
    cmd->add_option("--ny", flags->spec.ny, "grid nodes in y")
        ->check(CLI::Range(2, 4001))
        ->capture_default_str();
    cmd->add_option("--ntheta", flags->spec.n_theta, "orientation samples over [0, 2*pi)")
        ->check(CLI::Range(4, 100000))
        ->capture_default_str();
    auto* l_opt = cmd->add_option("--L", flags->spec.L,
                                  "characteristic length, mm (default sqrt(2)*r)")
                      ->check(CLI::PositiveNumber);
    cmd->add_option("--kappa-b", flags->kappa_b, "kappa(B) convention")
        ->check(CLI::IsMember({"ratio", "sqrt_ratio"}))
        ->capture_default_str();
    cmd->add_flag("--refine-theta", flags->spec.refine_theta,
                  "golden-section polish of the per-node optimum over theta");
    cmd->add_option("--levels", flags->levels, "isoconditioning levels in (0,1), e.g. 0.2,0.4")
        ->check(kLevelsValidator);
    cmd->add_option("--format", flags->format,
                    "grid/loci file format: csv (grid) with json loci, json, or gnuplot loci")
        ->check(CLI::IsMember({"csv", "json", "gnuplot"}))
        ->capture_default_str();
    cmd->add_option("--grid-out", flags->grid_out, "grid output path (default grid.csv/.json)");
    cmd->add_option("--loci-out", flags->loci_out,
                    "loci output path (default loci.json/.dat), used with --levels");
    cmd->callback([&shared, flags, l_opt] {
        const DesignParams params = shared.params();
        SweepSpec spec = flags->spec;
        spec.mode = mode_from(flags->mode);
        spec.matrix_kind = *matrix_kind_from_name(flags->matrix);
        spec.L = default_or(spec.L, l_opt, std::sqrt(2.0) * params.r);
        spec.kappa_b_variant =
            flags->kappa_b == "ratio" ? KappaVariant::Ratio : KappaVariant::SqrtRatio;
        if (!spec.valid()) throw DomainError("degenerate sweep window");

        const SweepGrid grid = sweep(params, spec);
        const auto mean = global_index(grid);
        if (!mean) throw DomainError("empty workspace: no reachable grid node");

        const bool grid_json = flags->format == "json";
        const std::string grid_path =
            flags->grid_out.empty() ? (grid_json ? "grid.json" : "grid.csv") : flags->grid_out;
        {
            std::ofstream out(grid_path);
            if (!out) throw DomainError("cannot write " + grid_path);
            if (grid_json)
                write_grid_json(grid, out, shared.precision);
            else
                write_grid_csv(grid, out, shared.precision);
        }

        if (!flags->levels.empty()) {
            const IsoLoci loci = extract_isoloci(grid, *parse_list(flags->levels));
            const bool loci_gnuplot = flags->format == "gnuplot";
            const std::string loci_path =
                flags->loci_out.empty() ? (loci_gnuplot ? "loci.dat" : "loci.json")
                                        : flags->loci_out;
            std::ofstream out(loci_path);
            if (!out) throw DomainError("cannot write " + loci_path);
            if (loci_gnuplot)
                write_loci_gnuplot(loci, out, shared.precision);
            else
                write_loci_json(loci, out, shared.precision);
        }
        std::cout << shared.num(*mean) << "\n";
    });
}

void register_compare(CLI::App& app, Shared& shared) {
    auto* cmd = app.add_subcommand(
        "compare", "Global conditioning indices for the two canonical working-mode classes");
    add_common(cmd, shared);
    auto spec = std::make_shared<SweepSpec>();
    auto kappa_b = std::make_shared<std::string>("ratio");
    cmd->add_option("--nx", spec->nx, "grid nodes in x")
        ->check(CLI::Range(2, 4001))
        ->capture_default_str();
    cmd->add_option("--ny", spec->ny, "grid nodes in y")
        ->check(CLI::Range(2, 4001))
        ->capture_default_str();
    cmd->add_option("--ntheta", spec->n_theta, "orientation samples over [0, 2*pi)")
        ->check(CLI::Range(4, 100000))
        ->capture_default_str();
    auto* l_opt =
        cmd->add_option("--L", spec->L, "characteristic length, mm (default sqrt(2)*r)")
            ->check(CLI::PositiveNumber);
    cmd->add_option("--kappa-b", *kappa_b, "kappa(B) convention")
        ->check(CLI::IsMember({"ratio", "sqrt_ratio"}))
        ->capture_default_str();
    cmd->callback([&shared, spec, kappa_b, l_opt] {
        const DesignParams params = shared.params();
        SweepSpec tpl = *spec;
        tpl.L = default_or(tpl.L, l_opt, std::sqrt(2.0) * params.r);
        tpl.kappa_b_variant =
            *kappa_b == "ratio" ? KappaVariant::Ratio : KappaVariant::SqrtRatio;
        const auto cmp = compare_modes(params, tpl);
        if (!cmp) throw DomainError("empty workspace: no reachable grid node");
        std::printf("mode  A_bar  B      K_bar\n");
        for (int row = 0; row < 2; ++row)
            std::printf("%s   %.3f  %.3f  %.3f\n", cmp->modes[row].to_string().c_str(),
                        cmp->global[row][0], cmp->global[row][1], cmp->global[row][2]);
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kinetostatic analysis of a planar 3-PRR parallel manipulator"};
    app.require_subcommand(1);

    Shared shared;
    register_ik(app, shared);
    register_dk(app, shared);
    register_jacobians(app, shared);
    register_classify(app, shared);
    register_charlen(app, shared);
    register_isotropy(app, shared);
    register_sweep(app, shared);
    register_compare(app, shared);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
