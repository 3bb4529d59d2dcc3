#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "wbcde/config.hpp"
#include "wbcde/detector.hpp"
#include "wbcde/error.hpp"
#include "wbcde/imaging.hpp"
#include "wbcde/rng.hpp"
#include "wbcde/segmentation.hpp"
#include "wbcde/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace wbcde::cli {

namespace {

std::string sha256_hex(const fs::path& path) {
    const auto bytes = read_file(path);
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("sha256 failed for " + path.string());
    }
    std::string hex;
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", md[i]);
        hex += buf;
    }
    return hex;
}

void write_text(const fs::path& path, const std::string& text) {
    write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json load_json(const fs::path& path) {
    const auto bytes = read_file(path);
    try {
        return json::parse(bytes.begin(), bytes.end());
    } catch (const json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

/// Record of one invocation, written as manifest.json next to the outputs.
struct RunManifest {
    std::string subcommand;
    std::vector<std::string> argv;
    std::vector<fs::path> inputs;
    std::vector<fs::path> outputs;
    json config = json::object();
    std::uint64_t seed = 0;

    void write(const fs::path& dir, double wall_ms) const {
        json in = json::object();
        for (const auto& p : inputs) in[p.string()] = sha256_hex(p);
        json out = json::object();
        for (const auto& p : outputs) out[p.string()] = sha256_hex(p);
        write_json(dir / "manifest.json", {{"subcommand", subcommand},
                                           {"argv", argv},
                                           {"inputs", in},
                                           {"outputs", out},
                                           {"config", config},
                                           {"seed", seed},
                                           {"rng", std::string(kRngAlgorithm)},
                                           {"wall_time_ms", wall_ms}});
    }
};

struct DetectorFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<double> threshold;
    std::optional<std::size_t> max_ellipses;
    std::optional<std::size_t> population;
    std::optional<double> factor;
    std::optional<double> crossover;
    std::optional<std::size_t> iterations;

    void add_to(CLI::App* app) {
        app->add_option("--config", config, "key=value config file")->check(CLI::ExistingFile);
        app->add_option("--seed", seed, "master seed");
        app->add_option("--threshold", threshold, "acceptance threshold on J");
        app->add_option("--max-ellipses", max_ellipses, "maximum number of detections");
        app->add_option("--population", population, "DE population size");
        app->add_option("--factor", factor, "DE mutation factor");
        app->add_option("--crossover", crossover, "DE crossover rate");
        app->add_option("--iterations", iterations, "DE generations per run");
    }

    /// Defaults, then the config file, then flags.
    DetectorConfig resolve() const {
        DetectorConfig cfg;
        if (!config.empty()) apply_config(cfg, load_key_values(config));
        if (seed) cfg.de.rng_seed = *seed;
        if (threshold) cfg.accept_threshold = *threshold;
        if (max_ellipses) cfg.max_ellipses = *max_ellipses;
        if (population) cfg.de.population_size = *population;
        if (factor) cfg.de.mutation_factor = *factor;
        if (crossover) cfg.de.crossover_rate = *crossover;
        if (iterations) cfg.de.iterations = *iterations;
        cfg.validate();
        return cfg;
    }
};

/// "kind" or "kind:level".
NoiseSpec parse_noise_arg(const std::string& arg, std::optional<double> level) {
    NoiseSpec spec;
    const auto colon = arg.find(':');
    spec.kind = parse_noise_kind(arg.substr(0, colon));
    if (colon != std::string::npos) {
        spec.level = parse_double("noise", arg.substr(colon + 1));
    } else if (level) {
        spec.level = *level;
    } else {
        throw ConfigError("noise '" + arg + "' has no level; use kind:level or --level");
    }
    spec.validate();
    return spec;
}

std::vector<fs::path> scene_files(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".scene") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw IoError("no .scene files in " + dir.string());
    return files;
}

class Cli {
public:
    Cli(int argc, const char* const* argv) : argv_(argv, argv + argc) {}

    int run(std::ostream& out, std::ostream& err) {
        CLI::App app{"Ellipse detection by differential evolution over edge points", "wbcde"};
        app.require_subcommand(1);
        app.set_version_flag("--version", "wbcde 1.0.0");

        auto* seg = app.add_subcommand("segment", "three-class segmentation: labels.pgm and mask.pgm");
        seg->add_option("input", input_, "input PGM")->required();
        seg->add_option("output", output_, "output directory")->required();
        seg->add_option("--config", flags_.config, "key=value config file")->check(CLI::ExistingFile);
        seg->add_option("--seed", flags_.seed, "segmentation seed");
        seg->callback([this] { cmd_segment(); });

        auto* edges = app.add_subcommand("edges", "morphological edge map: edges.pgm");
        edges->add_option("input", input_, "input PGM")->required();
        edges->add_option("output", output_, "output directory")->required();
        edges->add_option("--config", flags_.config, "key=value config file")->check(CLI::ExistingFile);
        edges->add_option("--seed", flags_.seed, "segmentation seed");
        edges->callback([this] { cmd_edges(); });

        auto* det = app.add_subcommand("detect", "detect ellipses: report.json and overlay.ppm");
        det->add_option("input", input_, "input PGM (an edge map with --edges-only)")->required();
        det->add_option("output", output_, "output directory")->required();
        flags_.add_to(det);
        det->add_flag("--edges-only", edges_only_, "treat the input as a binary edge map");
        det->callback([this] { cmd_detect(); });

        auto* syn = app.add_subcommand("synth", "render a scene file, or write --random N scene files");
        syn->add_option("paths", paths_, "SCENE OUTDIR, or OUTDIR with --random")->required();
        syn->add_option("--random", random_count_, "number of random scenes to generate");
        syn->add_option("--seed", flags_.seed, "scene seed");
        syn->callback([this] { cmd_synth(); });

        auto* noise = app.add_subcommand("noise", "add noise to an image: noisy.pgm");
        noise->add_option("input", input_, "input PGM")->required();
        noise->add_option("output", output_, "output directory")->required();
        noise->add_option("--noise", noise_args_, "salt_pepper or gaussian, optionally kind:level")->required();
        noise->add_option("--level", level_, "density for salt_pepper, sigma for gaussian");
        noise->add_option("--seed", flags_.seed, "noise seed");
        noise->callback([this] { cmd_noise(); });

        auto* bench = app.add_subcommand("bench", "benchmark a directory of scene files: bench.json and table.txt");
        bench->add_option("input", input_, "directory of .scene files")->required();
        bench->add_option("output", output_, "output directory")->required();
        flags_.add_to(bench);
        bench->add_option("--noise", noise_args_, "extra condition kind:level (repeatable), or 'standard'");
        bench->add_option("--level", level_, "level for --noise given without one");
        bench->add_option("--iou", iou_, "IoU needed for a match");
        bench->callback([this] { cmd_bench(); });

        auto* ev = app.add_subcommand("eval", "score a detection report against ground truth: eval.json");
        ev->add_option("report", input_, "report.json from detect")->required();
        ev->add_option("truth", truth_, "truth.json from synth")->required();
        ev->add_option("output", output_, "output directory")->required();
        ev->add_option("--iou", iou_, "IoU needed for a match");
        ev->callback([this] { cmd_eval(); });

        start_ = std::chrono::steady_clock::now();
        try {
            app.parse(static_cast<int>(argv_.size()), argv_.data());
        } catch (const CLI::CallForHelp& e) {
            return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
        } catch (const CLI::CallForAllHelp& e) {
            return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
        } catch (const CLI::CallForVersion& e) {
            app.exit(e, out, err);
            return kExitOk;
        } catch (const CLI::ParseError& e) {
            app.exit(e, out, err);
            return kExitUsage;
        } catch (const IoError& e) {
            err << "wbcde: " << e.what() << "\n";
            return kExitUsage;
        } catch (const FormatError& e) {
            err << "wbcde: " << e.what() << "\n";
            return kExitUsage;
        } catch (const ConfigError& e) {
            err << "wbcde: " << e.what() << "\n";
            return kExitUsage;
        } catch (const InsufficientEdges& e) {
            err << "wbcde: " << e.what() << "\n";
            return kExitUsage;
        } catch (const GenerationError& e) {
            err << "wbcde: " << e.what() << "\n";
            return kExitUsage;
        } catch (const std::invalid_argument& e) {
            err << "wbcde: " << e.what() << "\n";
            return kExitUsage;
        } catch (const std::exception& e) {
            err << "wbcde: internal error: " << e.what() << "\n";
            return kExitInternal;
        }
        return kExitOk;
    }

private:
    RunManifest manifest(const std::string& name) const {
        RunManifest m;
        m.subcommand = name;
        for (std::size_t i = 1; i < argv_.size(); ++i) m.argv.emplace_back(argv_[i]);
        return m;
    }

    void finish(const RunManifest& m) const {
        const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
        m.write(output_, ms);
    }

    SegmentationConfig segmentation_config() const {
        DetectorConfig cfg;
        if (!flags_.config.empty()) apply_config(cfg, load_key_values(flags_.config));
        if (flags_.seed) cfg.seg.rng_seed = *flags_.seed;
        cfg.seg.validate();
        return cfg.seg;
    }

    void cmd_segment() {
        const SegmentationConfig cfg = segmentation_config();
        const GrayImage img = load_image(input_);
        ensure_dir(output_);
        const ClassMap cmap = segment(img, cfg);
        auto m = manifest("segment");
        m.inputs = {input_};
        m.outputs = {output_ / "labels.pgm", output_ / "mask.pgm"};
        save_image(label_image(cmap), m.outputs[0]);
        save_image(wbc_mask(cmap, cfg), m.outputs[1]);
        DetectorConfig full;
        full.seg = cfg;
        m.config = to_json(full);
        m.seed = cfg.rng_seed;
        finish(m);
    }

    void cmd_edges() {
        const SegmentationConfig cfg = segmentation_config();
        const GrayImage img = load_image(input_);
        ensure_dir(output_);
        const EdgeMap em = morphological_edges(wbc_mask(segment(img, cfg), cfg));
        auto m = manifest("edges");
        m.inputs = {input_};
        m.outputs = {output_ / "edges.pgm"};
        save_image(em.membership(), m.outputs[0]);
        DetectorConfig full;
        full.seg = cfg;
        m.config = to_json(full);
        m.seed = cfg.rng_seed;
        finish(m);
    }

    void cmd_detect() {
        const DetectorConfig cfg = flags_.resolve();
        const GrayImage img = load_image(input_);
        ensure_dir(output_);
        const DetectionReport report = edges_only_ ? detect_on_edges(EdgeMap(to_binary(img)), cfg) : detect(img, cfg);
        std::vector<Ellipse> shapes;
        for (const auto& d : report.ellipses) shapes.push_back(d.ellipse);
        auto m = manifest("detect");
        m.inputs = {input_};
        m.outputs = {output_ / "report.json", output_ / "overlay.ppm"};
        write_json(m.outputs[0], to_json(report));
        save_image(overlay_ellipses(img, shapes), m.outputs[1]);
        m.config = to_json(cfg);
        m.seed = cfg.de.rng_seed;
        finish(m);
    }

    void cmd_synth() {
        auto m = manifest("synth");
        if (random_count_) {
            if (paths_.size() != 1) throw ConfigError("synth --random takes exactly one output directory");
            output_ = paths_[0];
            ensure_dir(output_);
            const std::uint64_t seed = flags_.seed.value_or(1);
            for (const auto& bs : random_bench_scenes(*random_count_, seed)) {
                const Scene scene = generate(bs.spec);
                const fs::path base = output_ / bs.name;
                write_text(fs::path(base).replace_extension(".scene"), to_text(bs.spec));
                save_image(scene.image, fs::path(base).replace_extension(".pgm"));
                write_json(fs::path(base).replace_extension(".truth.json"),
                           truth_to_json(scene.truth, bs.spec.width, bs.spec.height));
                m.outputs.push_back(fs::path(base).replace_extension(".scene"));
                m.outputs.push_back(fs::path(base).replace_extension(".pgm"));
                m.outputs.push_back(fs::path(base).replace_extension(".truth.json"));
            }
            m.seed = seed;
            m.config = {{"random", *random_count_}};
        } else {
            if (paths_.size() != 2) throw ConfigError("synth takes SCENE OUTDIR");
            const fs::path spec_path = paths_[0];
            output_ = paths_[1];
            SceneSpec spec = load_scene(spec_path);
            if (flags_.seed) spec.rng_seed = *flags_.seed;
            const Scene scene = generate(spec);
            ensure_dir(output_);
            m.inputs = {spec_path};
            m.outputs = {output_ / "image.pgm", output_ / "truth.json"};
            save_image(scene.image, m.outputs[0]);
            write_json(m.outputs[1], truth_to_json(scene.truth, spec.width, spec.height));
            m.seed = spec.rng_seed;
            m.config = {{"scene", to_text(spec)}};
        }
        finish(m);
    }

    void cmd_noise() {
        if (noise_args_.size() != 1) throw ConfigError("noise takes exactly one --noise");
        NoiseSpec spec = parse_noise_arg(noise_args_[0], level_);
        if (level_) spec.level = *level_;
        spec.rng_seed = flags_.seed.value_or(1);
        spec.validate();
        const GrayImage img = load_image(input_);
        ensure_dir(output_);
        auto m = manifest("noise");
        m.inputs = {input_};
        m.outputs = {output_ / "noisy.pgm"};
        save_image(add_noise(img, spec), m.outputs[0]);
        m.seed = spec.rng_seed;
        m.config = {{"noise", to_string(spec.kind)}, {"level", spec.level}};
        finish(m);
    }

    void cmd_bench() {
        BenchOptions opt;
        opt.detector = flags_.resolve();
        opt.seed = opt.detector.de.rng_seed;
        opt.iou_threshold = iou_;
        opt.conditions = {NoiseSpec{NoiseKind::SaltPepper, 0.0, 0}};
        for (const auto& arg : noise_args_) {
            if (arg == "standard") {
                const auto std_conds = standard_conditions();
                opt.conditions.insert(opt.conditions.end(), std_conds.begin() + 1, std_conds.end());
            } else {
                opt.conditions.push_back(parse_noise_arg(arg, level_));
            }
        }
        auto m = manifest("bench");
        std::vector<BenchScene> scenes;
        for (const auto& file : scene_files(input_)) {
            scenes.push_back({file.stem().string(), load_scene(file)});
            m.inputs.push_back(file);
        }
        const BenchResult result = run_bench(scenes, opt);
        ensure_dir(output_);
        m.outputs = {output_ / "bench.json", output_ / "table.txt"};
        write_json(m.outputs[0], to_json(result));
        write_text(m.outputs[1], format_table(result.rows));
        m.config = to_json(opt.detector);
        m.config["iou"] = opt.iou_threshold;
        m.seed = opt.seed;
        finish(m);
    }

    void cmd_eval() {
        const json report = load_json(input_);
        const json truth = load_json(truth_);
        std::vector<Ellipse> detected;
        std::vector<Ellipse> expected;
        int width = 0;
        int height = 0;
        try {
            for (const auto& d : detections_from_json(report)) detected.push_back(d.ellipse);
            width = truth.at("width").get<int>();
            height = truth.at("height").get<int>();
            for (const auto& e : truth.at("ellipses")) {
                expected.push_back({e.at("x0").get<double>(), e.at("y0").get<double>(), e.at("r_max").get<double>(),
                                    e.at("r_min").get<double>(), e.at("theta").get<double>()});
            }
        } catch (const json::exception& e) {
            throw FormatError(std::string("eval: ") + e.what());
        }
        ensure_dir(output_);
        auto m = manifest("eval");
        m.inputs = {input_, truth_};
        m.outputs = {output_ / "eval.json"};
        write_json(m.outputs[0], to_json(evaluate(detected, expected, width, height, iou_)));
        m.config = {{"iou", iou_}};
        finish(m);
    }

    std::vector<const char*> argv_;
    std::chrono::steady_clock::time_point start_;
    DetectorFlags flags_;
    fs::path input_;
    fs::path output_;
    fs::path truth_;
    std::vector<std::string> paths_;
    std::vector<std::string> noise_args_;
    std::optional<double> level_;
    std::optional<std::size_t> random_count_;
    double iou_ = 0.5;
    bool edges_only_ = false;
};

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    return Cli(argc, argv).run(out, err);
}

}  // namespace wbcde::cli
