#pragma once

// `shapecode` command-line front end. Exit codes: 0 success, 1 operational
// error (I/O, bad arguments, rejected program), 2 hash verification failure,
// 3 generation exhausted.

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "shapecode/analysis.hpp"
#include "shapecode/evaluator.hpp"
#include "shapecode/generator.hpp"
#include "shapecode/image_io.hpp"
#include "shapecode/parser.hpp"
#include "shapecode/runner.hpp"
#include "shapecode/version.hpp"

namespace shapecode {

enum class ExitCode : int { Success = 0, OperationalError = 1, VerificationFailure = 2, GenerationExhausted = 3 };

namespace cli {

inline std::string read_program(const std::string& path) {
    if (path == "-") return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
    return read_text_file(path);
}

inline IntRange parse_seed_range(const std::string& text) {
    const auto dots = text.find("..");
    try {
        if (dots == std::string::npos) {
            const auto v = std::stoll(text);
            return {v, v};
        }
        return {std::stoll(text.substr(0, dots)), std::stoll(text.substr(dots + 2))};
    } catch (const std::exception&) {
        throw std::invalid_argument("invalid seed range '" + text + "', expected LO..HI");
    }
}

inline std::vector<fs::path> discover_runs(const std::vector<std::string>& inputs) {
    std::vector<fs::path> runs;
    for (const auto& in : inputs) {
        const fs::path p(in);
        if (fs::exists(p / "run_config.json")) {
            runs.push_back(p);
            continue;
        }
        if (!fs::is_directory(p)) continue;
        std::vector<fs::path> children;
        for (const auto& e : fs::directory_iterator(p))
            if (e.is_directory() && fs::exists(e.path() / "run_config.json")) children.push_back(e.path());
        std::sort(children.begin(), children.end());
        runs.insert(runs.end(), children.begin(), children.end());
    }
    return runs;
}

struct Streams {
    std::ostream& out;
    std::ostream& err;
};

inline ExitCode cmd_generate(const std::string& preset, const std::string& split, const std::string& tiers,
                             const std::string& seeds, const std::string& out_dir, std::size_t jobs, Streams io) {
    SplitRequest req;
    if (!preset.empty()) {
        if (preset != "eval_v1") throw std::invalid_argument("unknown preset '" + preset + "'");
        req = eval_v1_request();
    } else {
        if (split.empty() || seeds.empty()) throw std::invalid_argument("--split and --seeds are required without --preset");
        req.split_name = split;
        req.seeds = parse_seed_range(seeds);
        std::stringstream ss(tiers);
        for (std::string name; std::getline(ss, name, ',');) {
            auto t = tier_by_name(name);
            if (!t) throw std::invalid_argument("unknown tier '" + name + "'");
            req.tiers.push_back(*t);
        }
        if (req.tiers.empty()) req.tiers = builtin_tiers();
    }
    req.workers = jobs;
    const Manifest m = generate_split(req, out_dir);
    io.out << "generated " << m.samples.size() << " samples for split " << m.split << " in " << out_dir << "\n";
    return ExitCode::Success;
}

inline ExitCode cmd_verify(const std::string& dataset, Streams io) {
    const VerifyReport report = verify_dataset(dataset);
    for (const auto& m : report.mismatches) {
        io.out << "MISMATCH " << m.sample_id << " expected " << m.expected;
        if (m.error.empty()) io.out << " actual " << m.actual << "\n";
        else io.out << " error " << m.error << "\n";
    }
    if (!report.ok()) {
        io.out << report.mismatches.size() << " of " << report.checked << " samples failed verification\n";
        return ExitCode::VerificationFailure;
    }
    io.out << "OK " << report.checked << " samples verified\n";
    return ExitCode::Success;
}

inline void print_parse_error(const ParseError& e, std::ostream& err) {
    err << "error: " << classify_error(e);
    if (e.line) err << " (line " << *e.line << ")";
    err << ": " << e.message << "\n";
}

inline ExitCode cmd_parse(const std::string& program, Streams io) {
    const ParseResult r = parse(read_program(program));
    if (!r) {
        print_parse_error(r.error(), io.err);
        io.out << classify_error(r.error()) << "\n";
        return ExitCode::OperationalError;
    }
    io.out << serialize(*r);
    return ExitCode::Success;
}

inline ExitCode cmd_render(const std::string& program, const std::string& out_png, Streams io) {
    const ParseResult r = parse(read_program(program));
    if (!r) {
        print_parse_error(r.error(), io.err);
        return ExitCode::OperationalError;
    }
    const RasterImage img = render(*r);
    write_png(img, out_png);
    io.out << pixel_hash(img) << "  " << out_png << "\n";
    return ExitCode::Success;
}

inline ExitCode cmd_eval(const std::string& pred, const std::string& target, bool normalize, Streams io) {
    std::string text = read_program(pred);
    if (normalize) text = normalize_prediction(text);
    io.out << to_json(evaluate(text, read_png(target))).dump() << "\n";
    return ExitCode::Success;
}

struct RunArgs {
    std::string dataset;
    std::string adapter;
    std::string command;
    std::string name = "external";
    int timeout = 1800;
    int retries = 2;
    double backoff = 2.0;
    std::size_t parallelism = 1;
    std::string out;
    std::string resume;
    bool skip_verify = false;
};

inline ExitCode cmd_run(const RunArgs& a, Streams io) {
    if (a.adapter.empty() == a.command.empty()) throw std::invalid_argument("exactly one of --adapter or --command is required");
    const AdapterSpec spec = a.command.empty() ? builtin_adapter(a.adapter)
                                               : external_adapter(a.name, a.command, a.timeout, a.retries, a.backoff);
    validate_adapter(spec);
    RunOptions opts;
    if (!a.out.empty()) opts.out_root = a.out;
    opts.parallelism = a.parallelism;
    opts.verify_hashes = !a.skip_verify;
    if (!a.resume.empty()) opts.resume_run_id = a.resume;
    const RunArtifact art = run_split(a.dataset, spec, opts);
    const auto& o = art.summary.at("overall");
    io.out << "run " << art.run_id << " -> " << art.run_dir.string() << "\n";
    io.out << "n=" << art.records.size() << " exact=" << fmt_fixed(o.at("exact_match").get<double>(), 3)
           << " pixacc=" << fmt_fixed(o.at("pixel_accuracy").get<double>(), 3)
           << " fg_iou=" << fmt_fixed(o.at("fg_iou").get<double>(), 3)
           << " parse=" << fmt_fixed(o.at("parse_success").get<double>(), 3)
           << " exec=" << fmt_fixed(o.at("exec_success").get<double>(), 3) << "\n";
    return ExitCode::Success;
}

struct AnalyzeArgs {
    std::vector<std::string> runs;
    std::string out;
    bool figures = false;
    int resamples = 1000;
    std::uint64_t seed = 0;
    std::size_t k = 3;
};

inline ExitCode cmd_analyze(const AnalyzeArgs& a, Streams io) {
    const auto paths = discover_runs(a.runs);
    if (paths.empty()) throw std::invalid_argument("no run directories found");
    std::vector<RunArtifact> runs;
    for (const auto& p : paths) runs.push_back(load_run(p));
    const auto labels = run_labels(runs);
    const BootstrapOptions opt{a.resamples, 0.95, a.seed};
    std::vector<std::vector<MetricSummary>> tables;
    for (const auto& r : runs) tables.push_back(summarize_run(r, opt));

    const fs::path out(a.out);
    fs::create_directories(out);
    write_text_file(out / "main_table.csv", summary_csv(labels, tables));
    const std::string md = summary_markdown(labels, tables, opt);
    write_text_file(out / "main_table.md", md);
    write_text_file(out / "error_histogram.csv", histogram_csv(labels, error_histogram(runs)));
    if (a.figures) {
        for (std::string_view metric : {"exact_match", "pixel_accuracy", "fg_iou", "parse_success"})
            difficulty_chart(labels, tables, metric, out / "figures" / ("by_tier_" + std::string(metric) + ".svg"));
        for (std::size_t i = 0; i < runs.size(); ++i)
            qualitative_panel(runs[i], a.k, a.k, out / "panels" / sanitize_name(labels[i]));
    }
    io.out << md;
    return ExitCode::Success;
}

}  // namespace cli

/// Entry point shared by the executable and the tests.
inline int run_cli(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Seeded shape-program benchmark: generate, verify, evaluate, run, analyze", "shapecode"};
    app.set_version_flag("--version", std::string("shapecode ") + kVersion);
    app.require_subcommand(1);
    const cli::Streams io{out, err};
    ExitCode code = ExitCode::Success;

    std::string preset, split, tiers, seeds, out_dir;
    std::size_t jobs = 1;
    auto* gen = app.add_subcommand("generate", "Generate a dataset split (target PNGs, metadata, manifest)");
    gen->add_option("--preset", preset, "Built-in split preset (eval_v1)");
    gen->add_option("--split", split, "Split name for a custom split");
    gen->add_option("--tiers", tiers, "Comma-separated tiers (easy,medium,hard)");
    gen->add_option("--seeds", seeds, "Seed range LO..HI, inclusive");
    gen->add_option("--out", out_dir, "Output directory")->required();
    gen->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
    gen->callback([&] { code = cli::cmd_generate(preset, split, tiers, seeds, out_dir, jobs, io); });

    std::string dataset;
    auto* ver = app.add_subcommand("verify", "Recompute pixel hashes and compare with the manifest");
    ver->add_option("--dataset", dataset, "Dataset directory")->required();
    ver->callback([&] { code = cli::cmd_verify(dataset, io); });

    std::string program, png_out;
    auto* par = app.add_subcommand("parse", "Parse a program and print its canonical form");
    par->add_option("--program", program, "Program file ('-' for stdin)")->required();
    par->callback([&] { code = cli::cmd_parse(program, io); });

    auto* ren = app.add_subcommand("render", "Render a program to PNG");
    ren->add_option("--program", program, "Program file ('-' for stdin)")->required();
    ren->add_option("--out", png_out, "Output PNG")->required();
    ren->callback([&] { code = cli::cmd_render(program, png_out, io); });

    std::string pred, target;
    bool normalize = false;
    auto* ev = app.add_subcommand("eval", "Score a predicted program against a target PNG");
    ev->add_option("--pred", pred, "Predicted program file ('-' for stdin)")->required();
    ev->add_option("--target", target, "Target PNG")->required();
    ev->add_flag("--normalize", normalize, "Apply the response normalizer first");
    ev->callback([&] { code = cli::cmd_eval(pred, target, normalize, io); });

    cli::RunArgs ra;
    auto* run = app.add_subcommand("run", "Run an adapter over a split and write artifacts");
    run->add_option("--dataset", ra.dataset, "Dataset directory")->required();
    run->add_option("--adapter", ra.adapter, "Built-in adapter: empty | heuristic-cv");
    run->add_option("--command", ra.command, "External command template with {image} and optional {prompt_file}");
    run->add_option("--name", ra.name, "Adapter name for --command runs");
    run->add_option("--timeout", ra.timeout, "Per-attempt timeout in seconds");
    run->add_option("--retries", ra.retries, "Retries after a failed attempt");
    run->add_option("--backoff", ra.backoff, "Backoff base in seconds (delay = base * 2^k)");
    run->add_option("--parallelism", ra.parallelism, "Concurrent samples")->check(CLI::PositiveNumber);
    run->add_option("--out", ra.out, "Artifact root (default $SHAPECODE_RUNS_DIR or ./runs)");
    run->add_option("--resume", ra.resume, "Resume the given run id, skipping recorded samples");
    run->add_flag("--skip-verify", ra.skip_verify, "Skip manifest hash verification");
    run->callback([&] { code = cli::cmd_run(ra, io); });

    cli::AnalyzeArgs aa;
    auto* an = app.add_subcommand("analyze", "Aggregate runs into tables, histograms and figures");
    an->add_option("--runs", aa.runs, "Run directories or directories containing runs")->required();
    an->add_option("--out", aa.out, "Report directory")->required();
    an->add_flag("--figures", aa.figures, "Also write SVG charts and qualitative panels");
    an->add_option("--resamples", aa.resamples, "Bootstrap resamples")->check(CLI::PositiveNumber);
    an->add_option("--seed", aa.seed, "Bootstrap seed");
    an->add_option("--k", aa.k, "Wins and losses per qualitative panel");
    an->callback([&] { code = cli::cmd_analyze(aa, io); });

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e, out, err);
        return rc == 0 ? 0 : static_cast<int>(ExitCode::OperationalError);
    } catch (const GenerationExhausted& e) {
        err << "error: " << e.what() << "\n";
        return static_cast<int>(ExitCode::GenerationExhausted);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return static_cast<int>(ExitCode::OperationalError);
    }
    return static_cast<int>(code);
}

inline int run_cli(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(std::move(args));
}

}  // namespace shapecode
