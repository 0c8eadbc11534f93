// poreflow: permeability of segmented voxel images.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "poreflow/classify.hpp"
#include "poreflow/errors.hpp"
#include "poreflow/post.hpp"
#include "poreflow/solver.hpp"
#include "poreflow/synth.hpp"
#include "poreflow/voxel.hpp"
#include "poreflow/workflow.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace poreflow;

enum Exit { ok = 0, failure = 1, config = 2, non_percolating = 3, non_convergence = 4 };

struct ImageOptions {
    std::string path;
    std::vector<int> dims;
    std::optional<double> length_m;
    std::optional<int> threshold;
};

struct RunOptions {
    std::string model = "auto";
    std::string direction = "z";
    std::string bc = "pressure-drop";
    double dp = 1.0;
    double rtol = 1e-8;
    std::optional<double> rtol_a;
    std::optional<double> k_stokes;
    int threads = 0;
    bool deterministic = false;
    bool cross_check = false;
    int maxit = 2000;
    std::string output;
    std::string matrix_dir;
};

void add_image_options(CLI::App* cmd, ImageOptions& opt) {
    cmd->add_option("image", opt.path, "Raw uint8 porosity volume")->required();
    cmd->add_option("--dims", opt.dims, "nx ny nz (default: from the .meta sidecar)")->expected(3);
    cmd->add_option("--length", opt.length_m, "Sample length L in meters (default: sidecar, else 1)");
    cmd->add_option("--threshold", opt.threshold, "Ternary segmentation threshold in (0, 100]");
}

void add_run_options(CLI::App* cmd, RunOptions& opt) {
    cmd->add_option("--model", opt.model, "auto|stokes|stokes-brinkman|brinkman|darcy")->capture_default_str();
    cmd->add_option("--direction", opt.direction, "Flow direction x|y|z")->capture_default_str();
    cmd->add_option("--bc", opt.bc, "pressure-drop|periodic")->capture_default_str();
    cmd->add_option("--dp", opt.dp, "Pressure drop p_in - p_out, or body force for periodic")->capture_default_str();
    cmd->add_option("--rtol", opt.rtol, "Outer relative tolerance rtol_S")->capture_default_str();
    cmd->add_option("--rtol-a", opt.rtol_a, "Inner velocity tolerance (default 1e-2 * rtol)");
    cmd->add_option("--k-stokes", opt.k_stokes, "Fictitious permeability of fluid voxels in mkDa (auto: 1e7)");
    cmd->add_option("--threads", opt.threads, "Thread count, 0 keeps the runtime default")->capture_default_str();
    cmd->add_flag("--deterministic", opt.deterministic, "Single-threaded, bit-reproducible run");
    cmd->add_flag("--cross-check", opt.cross_check, "Also solve Stokes-Brinkman on Category A samples");
    cmd->add_option("--maxit", opt.maxit, "Outer iteration limit")->capture_default_str();
    cmd->add_option("-o,--output", opt.output, "Output file (default: stdout)");
    cmd->add_option("--dump-matrices", opt.matrix_dir, "Write A and Shat in Matrix Market format to this directory");
}

VoxelImage load_image(const ImageOptions& opt) {
    const auto meta = read_sidecar(sidecar_path(opt.path));
    Dims dims;
    if (!opt.dims.empty()) {
        dims = {opt.dims[0], opt.dims[1], opt.dims[2]};
    } else if (meta.dims) {
        dims = *meta.dims;
    } else {
        throw ConfigError("image dimensions unknown: pass --dims or provide " + sidecar_path(opt.path).string());
    }
    PhysicalScale scale{opt.length_m.value_or(meta.length_m.value_or(1.0))};
    if (!(scale.length_m > 0.0)) throw ConfigError("sample length must be positive");
    auto image = load_raw(opt.path, dims, scale);
    if (opt.threshold) image = segment_ternary(image, *opt.threshold).image;
    return image;
}

FlowSetup make_setup(const RunOptions& opt) {
    FlowSetup setup;
    setup.direction = parse_axis(opt.direction);
    setup.bc = parse_boundary(opt.bc);
    if (opt.model != "auto") setup.model = parse_model(opt.model);
    if (setup.bc == BoundaryKind::periodic) {
        setup.body_force = opt.dp;
    } else {
        setup.p_in = opt.dp;
        setup.p_out = 0.0;
    }
    setup.k_stokes_mkda = opt.k_stokes;
    return setup;
}

SolverConfig make_config(const RunOptions& opt) {
    SolverConfig cfg;
    cfg.rtol_S = opt.rtol;
    cfg.rtol_A = opt.rtol_a;
    cfg.k_stokes_mkda = opt.k_stokes;
    cfg.maxit_outer = opt.maxit;
    cfg.threads = opt.deterministic ? 1 : opt.threads;
    cfg.deterministic = opt.deterministic;
    cfg.validate();
    return cfg;
}

WorkflowResult run(const VoxelImage& image, const RunOptions& opt) {
    const auto setup = make_setup(opt);
    const auto cfg = make_config(opt);
    return opt.model == "auto" ? auto_workflow(image, setup, cfg, opt.cross_check) : forced_workflow(image, setup, cfg);
}

json porosity_json(const VoxelImage& image) {
    const auto stats = porosity_stats(image);
    return {{"total", stats.total}, {"resolved", stats.resolved}, {"unresolved", stats.unresolved}};
}

json result_json(const WorkflowResult& result, const RunOptions& opt) {
    json j;
    j["category"] = to_string(result.report.category);
    j["model"] = result.run ? to_string(result.model) : "none";
    j["direction"] = to_string(result.permeability.direction);
    j["k_hat"] = result.permeability.k_hat;
    j["k_mkDa"] = result.permeability.k_mkda;
    j["k_m2"] = result.permeability.k_m2;
    j["darcy_velocity"] = result.permeability.darcy_velocity;
    j["dp"] = result.permeability.dp;
    j["rtol_S"] = opt.rtol;
    j["iterations_outer"] = result.run ? result.run->solution.outer.iterations : 0;
    j["inner_iterations_total"] = result.run ? result.run->solution.inner_iterations : 0;
    j["wall_time_s"] = result.run ? result.run->solution.wall_time_s : 0.0;
    j["divergence_norm"] = result.run ? divergence_norm(result.run->solution) : 0.0;
    if (result.cross_check) {
        const auto& sb = *result.cross_check;
        j["stokes_brinkman_check"] = {{"k_hat", sb.permeability.k_hat},
                                      {"k_mkDa", sb.permeability.k_mkda},
                                      {"iterations_outer", sb.solution.outer.iterations},
                                      {"wall_time_s", sb.solution.wall_time_s}};
    }
    return j;
}

void emit(const std::string& text, const std::string& path) {
    if (path.empty()) {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << text;
    if (!out) throw Error("failed writing " + path);
}

void dump_matrices(const WorkflowResult& result, const std::string& dir) {
    if (dir.empty() || !result.run) return;
    const auto& ops = *result.run->solution.ops;
    std::filesystem::create_directories(dir);
    ops.a.write_matrix_market(std::filesystem::path(dir) / "A.mtx");
    assemble_schur_approximation(ops).write_matrix_market(std::filesystem::path(dir) / "Shat.mtx");
}

const char* yes_no(bool v) { return v ? "Yes" : "No"; }

int cmd_info(const ImageOptions& img, const std::vector<std::string>& directions) {
    const auto image = load_image(img);
    const auto& d = image.dims();
    const auto stats = porosity_stats(image);
    std::printf("dims: %d x %d x %d\n", d.nx, d.ny, d.nz);
    std::printf("length_m: %g\n", image.scale().length_m);
    std::printf("voxels: fluid %zu, porous %zu, solid %zu\n", image.count_fluid(), image.count_porous(), image.count_solid());
    std::printf("porosity: total %.4f, resolved %.4f, unresolved %.4f\n", stats.total, stats.resolved, stats.unresolved);
    for (const auto& name : directions) {
        const auto axis = parse_axis(name);
        const auto report = classify(image, axis);
        const bool stokes = report.category == Category::b;
        const bool sb = report.category != Category::non_percolating;
        std::printf("%s: category %s, Stokes: %s, Stokes-Brinkman: %s\n", name.c_str(), to_string(report.category).c_str(),
                    yes_no(stokes), yes_no(sb));
    }
    return ok;
}

int cmd_classify(const ImageOptions& img, const std::string& direction, const std::string& output) {
    const auto image = load_image(img);
    const auto axis = parse_axis(direction);
    const auto pre = preprocess(image, axis);
    json j;
    j["category"] = to_string(pre.report.category);
    j["direction"] = to_string(axis);
    j["removed_voxels"] = pre.report.removed_voxels;
    j["percolating_components"] = pre.report.component_count;
    j["porosity"] = porosity_json(image);
    j["porosity_after_cleanup"] = porosity_json(pre.image);
    emit(j.dump(2) + "\n", output);
    return ok;
}

struct GenerateOptions {
    std::string kind = "homogeneous";
    std::vector<int> dims{32, 32, 32};
    double length_m = 1.0;
    std::string axis = "z";
    double diameter = 0.5;
    int width = 8;
    int background = 100;
    int slab_porosity = 60;
    int slab_thickness = 4;
    std::vector<std::string> layers;
    int porosity = 0;
    std::string output;
};

int cmd_generate(const GenerateOptions& opt) {
    GeometrySpec spec;
    spec.kind = parse_geometry_kind(opt.kind);
    spec.dims = {opt.dims[0], opt.dims[1], opt.dims[2]};
    spec.scale = {opt.length_m};
    spec.axis = parse_axis(opt.axis);
    spec.diameter = opt.diameter;
    spec.width = opt.width;
    auto byte = [](int v, const char* what) {
        if (v < 0 || v > 100) throw ConfigError(std::string(what) + " must lie in [0, 100]");
        return static_cast<std::uint8_t>(v);
    };
    spec.background = byte(opt.background, "background");
    spec.slab_porosity = byte(opt.slab_porosity, "slab porosity");
    spec.slab_thickness = opt.slab_thickness;
    spec.porosity = byte(opt.porosity, "porosity");
    for (const auto& layer : opt.layers) {
        const auto colon = layer.find(':');
        if (colon == std::string::npos) throw ConfigError("layer '" + layer + "' is not thickness:porosity");
        try {
            spec.layers.emplace_back(std::stoi(layer.substr(0, colon)), byte(std::stoi(layer.substr(colon + 1)), "layer porosity"));
        } catch (const std::logic_error&) {
            throw ConfigError("layer '" + layer + "' is not thickness:porosity");
        }
    }
    if (!(spec.scale.length_m > 0.0)) throw ConfigError("sample length must be positive");
    const auto image = generate(spec);
    save_raw(image, opt.output);
    write_sidecar(sidecar_path(opt.output), {image.dims(), image.scale().length_m});
    std::printf("wrote %s (%d x %d x %d), category along %s: %s\n", opt.output.c_str(), spec.dims.nx, spec.dims.ny,
                spec.dims.nz, opt.axis.c_str(), to_string(classify(image, spec.axis).category).c_str());
    return ok;
}

int cmd_solve(const ImageOptions& img, const RunOptions& opt) {
    const auto image = load_image(img);
    const auto result = run(image, opt);
    dump_matrices(result, opt.matrix_dir);
    emit(result_json(result, opt).dump(2) + "\n", opt.output);
    return ok;
}

int cmd_sweep(const ImageOptions& img, RunOptions opt, const std::string& parameter, const std::vector<double>& values) {
    if (parameter != "rtol" && parameter != "k_stokes") throw ConfigError("sweep parameter must be rtol or k_stokes");
    const auto image = load_image(img);
    std::ostringstream csv;
    csv << "value,k_mkDa,iterations,wall_time_s,status\n";
    csv.precision(10);
    for (const double value : values) {
        RunOptions local = opt;
        if (parameter == "rtol") {
            local.rtol = value;
        } else {
            local.k_stokes = value;
        }
        csv << value << ',';
        try {
            const auto result = run(image, local);
            const int its = result.run ? result.run->solution.outer.iterations : 0;
            const double wall = result.run ? result.run->solution.wall_time_s : 0.0;
            csv << result.permeability.k_mkda << ',' << its << ',' << wall << ",ok\n";
        } catch (const NonConvergenceError&) {
            csv << ",,,non_convergence\n";
        } catch (const NonPercolatingError&) {
            csv << ",,,non_percolating\n";
        } catch (const ConfigError&) {
            csv << ",,,config_error\n";
        } catch (const Error&) {
            csv << ",,,error\n";
        }
    }
    emit(csv.str(), opt.output);
    return ok;
}

int cmd_export(const ImageOptions& img, RunOptions opt, const std::string& vtk_path) {
    const auto image = load_image(img);
    const auto result = run(image, opt);
    if (!result.run) throw NonPercolatingError("sample does not percolate: no fields to export");
    // fields live on the preprocessed image; its porosity map is what was solved
    auto cleaned = preprocess(image, parse_axis(opt.direction)).image;
    export_fields(result.run->solution, cleaned, vtk_path);
    emit(result_json(result, opt).dump(2) + "\n", opt.output);
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Permeability of segmented voxel images (Stokes, Stokes-Brinkman, Brinkman, Darcy)"};
    app.set_config("--config", "", "Flat key=value configuration file");
    app.require_subcommand(1);

    ImageOptions info_img;
    std::vector<std::string> info_dirs{"z"};
    auto* info = app.add_subcommand("info", "Dimensions, porosity and connectivity of an image");
    add_image_options(info, info_img);
    info->add_option("--direction", info_dirs, "Directions to classify")->capture_default_str();

    ImageOptions cls_img;
    std::string cls_dir = "z";
    std::string cls_out;
    auto* cls = app.add_subcommand("classify", "Connectivity category along one direction (JSON)");
    add_image_options(cls, cls_img);
    cls->add_option("--direction", cls_dir, "Flow direction x|y|z")->capture_default_str();
    cls->add_option("-o,--output", cls_out, "Output file (default: stdout)");

    GenerateOptions gen_opt;
    auto* gen = app.add_subcommand("generate", "Write a synthetic geometry as .raw plus .meta sidecar");
    gen->add_option("--geometry", gen_opt.kind, "sphere_array|channel|blocked_channel|layered|homogeneous")
        ->capture_default_str();
    gen->add_option("--dims", gen_opt.dims, "nx ny nz")->expected(3)->capture_default_str();
    gen->add_option("--length", gen_opt.length_m, "Sample length L in meters")->capture_default_str();
    gen->add_option("--axis", gen_opt.axis, "Channel or layering axis")->capture_default_str();
    gen->add_option("--diameter", gen_opt.diameter, "Sphere diameter relative to the box")->capture_default_str();
    gen->add_option("--width", gen_opt.width, "Channel width in voxels")->capture_default_str();
    gen->add_option("--background", gen_opt.background, "Channel matrix porosity")->capture_default_str();
    gen->add_option("--slab-porosity", gen_opt.slab_porosity, "Blocking slab porosity")->capture_default_str();
    gen->add_option("--slab-thickness", gen_opt.slab_thickness, "Blocking slab thickness in voxels")->capture_default_str();
    gen->add_option("--layer", gen_opt.layers, "Layer as thickness:porosity, repeatable");
    gen->add_option("--porosity", gen_opt.porosity, "Homogeneous porosity")->capture_default_str();
    gen->add_option("-o,--output", gen_opt.output, "Output .raw path")->required();

    ImageOptions solve_img;
    RunOptions solve_opt;
    auto* slv = app.add_subcommand("solve", "Classify, solve and report permeability (JSON)");
    add_image_options(slv, solve_img);
    add_run_options(slv, solve_opt);

    ImageOptions sweep_img;
    RunOptions sweep_opt;
    std::string sweep_param = "k_stokes";
    std::vector<double> sweep_values;
    auto* swp = app.add_subcommand("sweep", "Repeat a solve over rtol or K_stokes values (CSV)");
    add_image_options(swp, sweep_img);
    add_run_options(swp, sweep_opt);
    swp->add_option("--param", sweep_param, "rtol|k_stokes")->capture_default_str();
    swp->add_option("--values", sweep_values, "Values to sweep")->delimiter(',');

    ImageOptions exp_img;
    RunOptions exp_opt;
    std::string exp_vtk;
    auto* exp = app.add_subcommand("export", "Solve and write pressure/velocity/porosity as legacy VTK");
    add_image_options(exp, exp_img);
    add_run_options(exp, exp_opt);
    exp->add_option("--vtk", exp_vtk, "VTK output path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return config;
    }

    try {
        if (*info) return cmd_info(info_img, info_dirs);
        if (*cls) return cmd_classify(cls_img, cls_dir, cls_out);
        if (*gen) return cmd_generate(gen_opt);
        if (*slv) return cmd_solve(solve_img, solve_opt);
        if (*swp) return cmd_sweep(sweep_img, sweep_opt, sweep_param, sweep_values);
        if (*exp) return cmd_export(exp_img, exp_opt, exp_vtk);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return config;
    } catch (const DomainError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return config;
    } catch (const NonPercolatingError& e) {
        std::cerr << "non-percolating sample: " << e.what() << '\n';
        return non_percolating;
    } catch (const NonConvergenceError& e) {
        std::cerr << "no convergence: " << e.what() << '\n';
        return non_convergence;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return failure;
    }
    return failure;
}
