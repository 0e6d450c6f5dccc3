// conflab command line: config-driven runs plus direct access to the Cardy
// formula, percolation, SAW enumeration and SLE samples.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "conflab/conflab.hpp"

using namespace conflab;

namespace {

struct ToolError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::ofstream open_out(const std::string& file) {
    std::ofstream os(file);
    if (!os) throw ToolError("cannot write '" + file + "'");
    return os;
}

void emit_json(const ExperimentResult& r, const std::string& out) {
    if (out.empty() || out == "-") {
        std::cout << result_json_string(r);
        return;
    }
    auto os = open_out(out);
    os << result_json_string(r);
}

std::string twelve(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12f", v);
    return buf;
}

int report(const std::string& kind, const std::string& message, const std::string& key = "") {
    nlohmann::json j{{"error", kind}, {"message", message}};
    if (!key.empty()) j["key"] = key;
    std::cerr << j.dump() << "\n";
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"conflab: conformally invariant lattice and continuum models"};
    app.require_subcommand(1);

    // run -------------------------------------------------------------------
    auto* run = app.add_subcommand("run", "Run a configured experiment and write ExperimentResult JSON");
    std::string cfg_file, out_file, csv_file, svg_file;
    std::uint64_t seed = 7;
    unsigned threads = 1;
    run->add_option("--config", cfg_file, "key = value config file")->required();
    run->add_option("--seed", seed, "master seed");
    run->add_option("--out", out_file, "JSON output (default stdout)");
    run->add_option("--csv", csv_file, "also write points as CSV");
    run->add_option("--svg", svg_file, "also write a log-log SVG plot");
    run->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);

    // cardy -----------------------------------------------------------------
    auto* cardy = app.add_subcommand("cardy", "Cardy's crossing function F");
    std::optional<double> cardy_x;
    std::vector<double> rect;
    int table_n = 0;
    auto* ox = cardy->add_option("--x", cardy_x, "cross-ratio in [0, 1]");
    auto* orect = cardy->add_option("--rect", rect, "rectangle L l")->expected(2);
    auto* otab = cardy->add_option("--table", table_n, "CSV of F on n+1 equally spaced x")->check(CLI::PositiveNumber);
    ox->excludes(orect)->excludes(otab);
    orect->excludes(otab);

    // perc ------------------------------------------------------------------
    auto* perc = app.add_subcommand("perc", "Critical bond percolation");
    perc->require_subcommand(1);
    PercCrossingParams cross_p;
    auto* cross = perc->add_subcommand("cross", "Left-right crossing of an L x l rectangle");
    cross->add_option("--L", cross_p.L);
    cross->add_option("--l", cross_p.l);
    cross->add_option("--n", cross_p.n, "lattice units per unit length");
    cross->add_option("--trials", cross_p.trials);
    cross->add_option("--p", cross_p.p);
    PercBoundaryParams bnd_p;
    int bnd_n = 256;
    auto* boundary = perc->add_subcommand("boundary", "Hull perimeter of the largest cluster in an n x n box");
    boundary->add_option("--n", bnd_n);
    boundary->add_option("--trials", bnd_p.trials);
    boundary->add_option("--p", bnd_p.p);
    int ex_w = 512, ex_h = 256;
    double ex_p = 0.5;
    std::size_t ex_steps = 1000000;
    std::string ex_csv;
    auto* explore = perc->add_subcommand("explore", "Exploration interface in a half-plane slab");
    explore->add_option("--width", ex_w);
    explore->add_option("--height", ex_h);
    explore->add_option("--p", ex_p);
    explore->add_option("--max-steps", ex_steps);
    explore->add_option("--csv", ex_csv, "path CSV (lattice units)");
    for (auto* s : {cross, boundary, explore}) {
        s->add_option("--seed", seed);
        s->add_option("--out", out_file, "JSON output (default stdout)");
        s->add_option("--threads", threads)->check(CLI::PositiveNumber);
    }

    // saw -------------------------------------------------------------------
    auto* saw = app.add_subcommand("saw", "Exact self-avoiding walk enumeration");
    saw->require_subcommand(1);
    int saw_n = 12;
    std::string lattice_name = "square";
    auto* count = saw->add_subcommand("count", "CSV n, a_n, a_n^(1/n)");
    auto* diam = saw->add_subcommand("diam", "CSV histogram of the diameter of n-step walks");
    for (auto* s : {count, diam}) {
        s->add_option("--n", saw_n);
        s->add_option("--lattice", lattice_name)->check(CLI::IsMember({"square", "triangular"}));
        s->add_option("--threads", threads)->check(CLI::PositiveNumber);
    }

    // sle -------------------------------------------------------------------
    auto* sle = app.add_subcommand("sle", "Sample an SLE driving function and hull");
    double kappa = 6.0, dt = 1e-3, horizon = 1.0, collide = 2.0;
    std::optional<double> tmin;
    int cells = 256;
    std::string driving_csv, hull_file;
    sle->add_option("--kappa", kappa);
    sle->add_option("--dt", dt);
    sle->add_option("--horizon", horizon, "chordal capacity time, or radial t_max");
    sle->add_option("--tmin", tmin, "radial start time; selects radial SLE run to the unit circle");
    sle->add_option("--collide-scale", collide);
    sle->add_option("--seed", seed);
    sle->add_option("--driving", driving_csv, "driving CSV (t, value)");
    sle->add_option("--hull", hull_file, "hull GridMask file");
    sle->add_option("--cells", cells, "hull grid width in cells")->check(CLI::PositiveNumber);
    sle->add_option("--threads", threads)->check(CLI::PositiveNumber);
    sle->add_option("--out", out_file, "JSON summary (default stdout)");

    // mask ------------------------------------------------------------------
    auto* mask = app.add_subcommand("mask", "Box-counting dimension of a cached GridMask");
    std::string mask_file;
    std::vector<int> scales{1, 2, 4, 8, 16};
    mask->add_option("--in", mask_file)->required();
    mask->add_option("--scales", scales);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            const auto r = run_experiment(Config::load(cfg_file), seed, threads);
            emit_json(r, out_file);
            if (!csv_file.empty()) {
                auto os = open_out(csv_file);
                write_points_csv(os, r);
            }
            if (!svg_file.empty()) {
                auto os = open_out(svg_file);
                write_points_svg(os, r);
            }
        } else if (cardy->parsed()) {
            if (cardy_x) {
                std::cout << twelve(special::cardy_F(*cardy_x)) << "\n";
            } else if (!rect.empty()) {
                std::cout << twelve(special::rectangle_crossing_probability({rect[0], rect[1]})) << "\n";
            } else if (table_n > 0) {
                std::cout << "x,F\n";
                for (int k = 0; k <= table_n; ++k) {
                    const double x = static_cast<double>(k) / table_n;
                    std::cout << twelve(x) << "," << twelve(special::cardy_F(x)) << "\n";
                }
            } else {
                throw ToolError("cardy: give --x, --rect or --table");
            }
        } else if (cross->parsed()) {
            emit_json(perc_crossing_experiment(cross_p, RngStream(seed, 0), threads), out_file);
        } else if (boundary->parsed()) {
            bnd_p.sizes = {static_cast<double>(bnd_n)};
            emit_json(perc_boundary_experiment(bnd_p, RngStream(seed, 0), threads), out_file);
        } else if (explore->parsed()) {
            if (ex_w < 2 || ex_h < 1) throw DomainError("perc explore: need width >= 2 and height >= 1");
            RngStream g(seed, 0);
            const auto t0 = std::chrono::steady_clock::now();
            const auto path = sample_exploration(ex_w, ex_h, ex_p, ex_steps, g);
            ExperimentResult r;
            r.experiment_id = "perc-explore";
            r.master_seed = seed;
            r.parameters = {{"width", std::to_string(ex_w)},
                            {"height", std::to_string(ex_h)},
                            {"p", Config::format_number(ex_p)},
                            {"max_steps", std::to_string(ex_steps)}};
            r.metrics["steps"] = static_cast<double>(path.vertices.size() - 1);
            r.metrics["exited"] = path.exited ? 1.0 : 0.0;
            const auto planar = path.to_planar();
            double top = 0.0;
            for (auto z : planar.points) top = std::max(top, z.imag());
            r.metrics["max_height"] = top;
            if (!ex_csv.empty()) {
                auto os = open_out(ex_csv);
                write_path_csv(os, planar);
            }
            r.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            emit_json(r, out_file);
        } else if (count->parsed()) {
            const Lattice l = lattice_name == "square" ? Lattice::square : Lattice::triangular;
            const auto t = enumerate_saws(saw_n, l, true, threads);
            std::cout << "n,a_n,a_n^(1/n)\n";
            for (int k = 1; k <= t.max_n(); ++k)
                std::cout << k << "," << t.a(k).str() << ","
                          << twelve(std::exp(std::log(t.a(k).convert_to<double>()) / k)) << "\n";
        } else if (diam->parsed()) {
            const Lattice l = lattice_name == "square" ? Lattice::square : Lattice::triangular;
            const auto d = diameter_distribution(saw_n, l, threads);
            std::cout << "diameter_sq,diameter,count\n";
            for (const auto& [key, c] : d.histogram) {
                const double d2 = static_cast<double>(key) / d.key_scale;
                std::cout << Config::format_number(d2) << "," << twelve(std::sqrt(d2)) << "," << c.str() << "\n";
            }
        } else if (sle->parsed()) {
            RngStream g(seed, 0);
            const auto t0 = std::chrono::steady_clock::now();
            ExperimentResult r;
            r.master_seed = seed;
            r.parameters = {{"kappa", Config::format_number(kappa)},
                            {"dt", Config::format_number(dt)},
                            {"horizon", Config::format_number(horizon)},
                            {"collide_scale", Config::format_number(collide)},
                            {"cells", std::to_string(cells)}};
            DrivingFunction driving;
            std::optional<GridMask> hull;
            if (tmin) {
                r.experiment_id = "sle-radial";
                r.parameters["tmin"] = Config::format_number(*tmin);
                RadialOptions o{kappa, dt, *tmin, horizon, collide};
                if (hull_file.empty()) {
                    const auto touch = radial_touch(o, g);
                    r.metrics["touch_time"] = touch.time;
                    r.metrics["endpoint_arg"] = std::arg(touch.endpoint);
                    driving = touch.driving;
                } else {
                    const auto h = radial_cci_hull(o, g, centered_grid(0.0, 2.0 + 8.0 / cells, cells), threads);
                    r.metrics["touch_time"] = h.time;
                    r.metrics["endpoint_arg"] = std::arg(h.endpoint);
                    hull = h.hull;
                    RngStream again(seed, 0);
                    driving = radial_touch(o, again).driving;
                }
            } else {
                r.experiment_id = "sle-chordal";
                driving = sle_driving(kappa, dt, horizon, DrivingKind::chordal_real, g);
                if (!hull_file.empty()) {
                    const auto [lo, hi] = std::minmax_element(driving.values.begin(), driving.values.end());
                    const double top = 2.0 * std::sqrt(horizon) + 0.1;
                    const double left = *lo - top, width = (*hi - *lo) + 2.0 * top;
                    const double h = width / cells;
                    GridSpec grid{{left, 0.0}, h, cells, static_cast<int>(std::ceil(top / h))};
                    grid.validate();
                    hull = chordal_hull_extract(driving, grid, horizon, {collide}, threads);
                }
            }
            r.metrics["driving_samples"] = static_cast<double>(driving.times.size());
            if (hull) {
                r.metrics["hull_cells"] = static_cast<double>(std::count(hull->bits.begin(), hull->bits.end(), 1));
                save_mask(hull_file, *hull);
            }
            if (!driving_csv.empty()) {
                auto os = open_out(driving_csv);
                write_driving_csv(os, driving);
            }
            r.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            emit_json(r, out_file);
        } else if (mask->parsed()) {
            const auto m = load_mask(mask_file);
            const auto s = box_counting_dimension(m, scales);
            std::cout << nlohmann::json{{"cols", m.spec.cols}, {"rows", m.spec.rows}, {"dimension", s.slope},
                                        {"dimension_stderr", s.error}}
                             .dump(2)
                      << "\n";
        }
    } catch (const ConfigError& e) {
        return report("config", e.what(), e.key());
    } catch (const DomainError& e) {
        return report("domain", e.what());
    } catch (const NotStoppedError& e) {
        return report("not_stopped", e.what());
    } catch (const OutOfBoundsError& e) {
        return report("out_of_bounds", e.what());
    } catch (const std::exception& e) {
        return report("io", e.what());
    }
    return 0;
}
