#pragma once

// Evaluation runs: obtain a prediction per sample from an adapter, normalize
// it, score it, and persist auditable artifacts:
//
//   <root>/<run_id>/run_config.json
//   <root>/<run_id>/prompt.txt
//   <root>/<run_id>/samples/<sample_id>.json
//   <root>/<run_id>/summary.json

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

#include "shapecode/baselines.hpp"
#include "shapecode/evaluator.hpp"
#include "shapecode/generator.hpp"
#include "shapecode/image_io.hpp"
#include "shapecode/parallel.hpp"
#include "shapecode/process.hpp"
#include "shapecode/stats.hpp"
#include "shapecode/version.hpp"

namespace shapecode {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

inline constexpr std::string_view kSystemInstruction =
    "Return only valid ShapeCodeBench DSL code. Do not include markdown fences, comments, or prose.";

inline std::string default_user_prompt() {
    return "The attached image is a 512x512 grayscale canvas with black shapes on a white background.\n"
           "Write the program that draws it, using only these functions:\n"
           "\n"
           "filled_circle(cx=<int>, cy=<int>, radius=<int>)\n"
           "circle(cx=<int>, cy=<int>, radius=<int>, stroke=<int>)\n"
           "filled_square(cx=<int>, cy=<int>, size=<int>)\n"
           "square(cx=<int>, cy=<int>, size=<int>, stroke=<int>)\n"
           "\n"
           "Formatting rules:\n"
           "- One function call per line.\n"
           "- Keyword arguments only, with integer literal values.\n"
           "- cx and cy must be in [0, 511]; radius and size must be in [1, 512].\n"
           "- circle stroke must be in [1, radius]; square stroke must be in [1, ceil(size/2)].\n"
           "- Shapes may extend past the canvas edge; they are clipped.\n"
           "- The origin (0, 0) is the top-left pixel; x grows right, y grows down.\n";
}

/// Zero-shot prompt: system instruction, blank line, user block.
inline std::string default_prompt() { return std::string(kSystemInstruction) + "\n\n" + default_user_prompt(); }

namespace detail {

inline std::string_view trim(std::string_view s) noexcept {
    const auto b = s.find_first_not_of(" \t\r\n\f\v");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n\f\v");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split_lines(std::string_view s) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto nl = s.find('\n', start);
        std::string_view line = s.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        if (nl == std::string_view::npos) break;
        start = nl + 1;
    }
    return lines;
}

// True when the trimmed line starts with a primitive name followed by '('.
inline bool starts_with_primitive(std::string_view line) {
    line = trim(line);
    for (ShapeKind k : kAllKinds) {
        const std::string_view name = kind_name(k);
        if (line.substr(0, name.size()) != name) continue;
        const std::string_view rest = trim(line.substr(name.size()));
        if (!rest.empty() && rest.front() == '(') return true;
    }
    return false;
}

inline std::string join(const std::vector<std::string_view>& lines) {
    std::string out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (i) out += '\n';
        out += lines[i];
    }
    return out;
}

}  // namespace detail

/// Extracts program text from a free-form response: the first fenced block
/// made only of primitive calls (else the first fenced block), otherwise the
/// lines that start with a primitive call, otherwise the raw text.
inline std::string normalize_prediction(std::string_view raw) {
    using namespace detail;
    const auto lines = split_lines(raw);

    std::vector<std::vector<std::string_view>> blocks;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (trim(lines[i]).substr(0, 3) != "```") continue;
        std::vector<std::string_view> body;
        std::size_t j = i + 1;
        for (; j < lines.size() && trim(lines[j]).substr(0, 3) != "```"; ++j) body.push_back(lines[j]);
        blocks.push_back(std::move(body));
        i = j;
    }
    if (!blocks.empty()) {
        for (const auto& body : blocks) {
            bool any = false, all = true;
            for (std::string_view l : body) {
                if (trim(l).empty()) continue;
                any = true;
                all = all && starts_with_primitive(l);
            }
            if (any && all) return join(body);
        }
        return join(blocks.front());
    }

    std::vector<std::string_view> calls;
    for (std::string_view l : lines)
        if (starts_with_primitive(l)) calls.push_back(trim(l));
    if (!calls.empty()) return join(calls);
    return std::string(raw);
}

enum class AdapterMode { Builtin, ExternalCommand };

struct AdapterSpec {
    std::string name;
    AdapterMode mode = AdapterMode::Builtin;
    std::string command_template;  // placeholders {image} and {prompt_file}
    int timeout_seconds = 1800;
    int max_retries = 2;
    double backoff_base_seconds = 2.0;
};

inline constexpr std::string_view kEmptyAdapter = "empty";
inline constexpr std::string_view kHeuristicAdapter = "heuristic-cv";

inline AdapterSpec builtin_adapter(std::string_view name) {
    if (name != kEmptyAdapter && name != kHeuristicAdapter)
        throw std::invalid_argument("unknown builtin adapter '" + std::string(name) + "'");
    return AdapterSpec{std::string(name), AdapterMode::Builtin, "", 0, 0, 0.0};
}

inline AdapterSpec external_adapter(std::string name, std::string command_template, int timeout_seconds = 1800,
                                    int max_retries = 2, double backoff_base_seconds = 2.0) {
    return AdapterSpec{std::move(name), AdapterMode::ExternalCommand, std::move(command_template), timeout_seconds,
                       max_retries, backoff_base_seconds};
}

/// Throws std::invalid_argument describing the first violated constraint.
inline void validate_adapter(const AdapterSpec& a) {
    if (a.name.empty()) throw std::invalid_argument("adapter name is empty");
    if (a.mode == AdapterMode::Builtin) {
        (void)builtin_adapter(a.name);
        return;
    }
    if (a.command_template.find("{image}") == std::string::npos)
        throw std::invalid_argument("command template must contain the {image} placeholder");
    if (a.timeout_seconds <= 0) throw std::invalid_argument("timeout must be positive");
    if (a.max_retries < 0) throw std::invalid_argument("retries must be non-negative");
    if (a.backoff_base_seconds < 0) throw std::invalid_argument("backoff base must be non-negative");
}

inline std::string expand_template(std::string_view tmpl, const fs::path& image, const fs::path& prompt_file) {
    std::string out;
    for (std::size_t i = 0; i < tmpl.size();) {
        if (tmpl.substr(i, 7) == "{image}") {
            out += shell_quote(image.string());
            i += 7;
        } else if (tmpl.substr(i, 13) == "{prompt_file}") {
            out += shell_quote(prompt_file.string());
            i += 13;
        } else {
            out += tmpl[i++];
        }
    }
    return out;
}

inline ojson to_json(const AdapterSpec& a) {
    ojson j;
    j["name"] = a.name;
    j["mode"] = a.mode == AdapterMode::Builtin ? "builtin" : "external_command";
    j["command_template"] = a.command_template;
    j["timeout_seconds"] = a.timeout_seconds;
    j["max_retries"] = a.max_retries;
    j["backoff_base_seconds"] = a.backoff_base_seconds;
    return j;
}

inline AdapterSpec adapter_from_json(const nlohmann::json& j) {
    AdapterSpec a;
    a.name = j.at("name").get<std::string>();
    a.mode = j.at("mode").get<std::string>() == "builtin" ? AdapterMode::Builtin : AdapterMode::ExternalCommand;
    a.command_template = j.at("command_template").get<std::string>();
    a.timeout_seconds = j.at("timeout_seconds").get<int>();
    a.max_retries = j.at("max_retries").get<int>();
    a.backoff_base_seconds = j.at("backoff_base_seconds").get<double>();
    return a;
}

struct AdapterResponse {
    std::string raw;
    int attempts = 1;
    std::optional<std::string> error;  // set when every attempt failed
};

/// One prediction request, with retries for external commands. Delay before
/// retry k (0-based) is backoff_base * 2^k seconds.
inline AdapterResponse invoke_adapter(const AdapterSpec& a, const fs::path& image, const fs::path& prompt_file) {
    if (a.mode == AdapterMode::Builtin) {
        const RasterImage target = read_png(image);
        return {a.name == kEmptyAdapter ? empty_baseline(target) : heuristic_baseline(target), 1, std::nullopt};
    }
    const std::string command = expand_template(a.command_template, image, prompt_file);
    AdapterResponse r;
    std::string last_error;
    for (int attempt = 0; attempt <= a.max_retries; ++attempt) {
        if (attempt > 0) {
            const double delay = a.backoff_base_seconds * static_cast<double>(1 << (attempt - 1));
            std::this_thread::sleep_for(std::chrono::duration<double>(delay));
        }
        r.attempts = attempt + 1;
        const CommandOutcome out = run_command(command, std::chrono::seconds(a.timeout_seconds));
        if (out.ok()) {
            r.raw = out.out;
            return r;
        }
        last_error = out.timed_out ? "timed out after " + std::to_string(a.timeout_seconds) + " s"
                                   : "exit code " + std::to_string(out.exit_code);
        const std::string_view err = detail::trim(out.err);
        if (!err.empty()) last_error += ": " + std::string(err.substr(err.size() > 500 ? err.size() - 500 : 0));
    }
    r.raw.clear();
    r.error = "adapter failed after " + std::to_string(r.attempts) + " attempt(s); last: " + last_error;
    return r;
}

struct SampleRun {
    std::string sample_id;
    std::string difficulty;
    ojson request;
    std::string raw_response;
    std::string normalized_prediction;
    double latency_ms = 0;
    int attempt_count = 0;
    std::optional<std::string> adapter_error;
    EvalResult eval;
};

inline ojson to_json(const SampleRun& s) {
    ojson j;
    j["sample_id"] = s.sample_id;
    j["difficulty"] = s.difficulty;
    j["request"] = s.request;
    j["raw_response"] = s.raw_response;
    j["normalized_prediction"] = s.normalized_prediction;
    j["latency_ms"] = s.latency_ms;
    j["attempt_count"] = s.attempt_count;
    j["adapter_error"] = s.adapter_error ? ojson(*s.adapter_error) : ojson(nullptr);
    j["usage"] = nullptr;
    j["eval"] = to_json(s.eval);
    return j;
}

inline SampleRun sample_run_from_json(const nlohmann::json& j) {
    SampleRun s;
    s.sample_id = j.at("sample_id").get<std::string>();
    s.difficulty = j.at("difficulty").get<std::string>();
    s.request = j.at("request");
    s.raw_response = j.at("raw_response").get<std::string>();
    s.normalized_prediction = j.at("normalized_prediction").get<std::string>();
    s.latency_ms = j.at("latency_ms").get<double>();
    s.attempt_count = j.at("attempt_count").get<int>();
    if (!j.at("adapter_error").is_null()) s.adapter_error = j.at("adapter_error").get<std::string>();
    s.eval = eval_result_from_json(j.at("eval"));
    return s;
}

inline constexpr std::string_view kMetricNames[] = {"exact_match", "pixel_accuracy", "fg_iou", "parse_success",
                                                    "exec_success"};

inline double metric_value(const EvalResult& e, std::string_view metric) {
    if (metric == "exact_match") return e.exact_match;
    if (metric == "pixel_accuracy") return e.pixel_accuracy;
    if (metric == "fg_iou") return e.fg_iou;
    if (metric == "parse_success") return e.parse_success;
    if (metric == "exec_success") return e.exec_success;
    throw std::invalid_argument("unknown metric '" + std::string(metric) + "'");
}

/// easy, medium, hard first; any other tier names after, alphabetically.
inline bool tier_less(std::string_view a, std::string_view b) {
    auto rank = [](std::string_view t) { return t == "easy" ? 0 : t == "medium" ? 1 : t == "hard" ? 2 : 3; };
    return rank(a) != rank(b) ? rank(a) < rank(b) : a < b;
}

inline std::vector<std::string> tiers_of(const std::vector<SampleRun>& records) {
    std::set<std::string> seen;
    for (const auto& r : records) seen.insert(r.difficulty);
    std::vector<std::string> tiers(seen.begin(), seen.end());
    std::sort(tiers.begin(), tiers.end(), tier_less);
    return tiers;
}

inline std::string error_key(const EvalResult& e) { return e.error_tag.value_or("none"); }

/// Aggregates per-sample records; a pure function of the records.
inline ojson summarize_records(std::string_view run_id, std::string_view adapter, std::vector<SampleRun> records) {
    std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) { return a.sample_id < b.sample_id; });
    auto block = [&](std::string_view tier) {
        ojson j;
        std::size_t n = 0;
        for (std::string_view m : kMetricNames) {
            FixedSum sum;
            for (const auto& r : records)
                if (tier.empty() || r.difficulty == tier) sum.add(metric_value(r.eval, m));
            n = sum.count();
            j[std::string(m)] = n ? sum.mean() : 0.0;
        }
        j["n"] = n;
        return j;
    };
    ojson j;
    j["run_id"] = run_id;
    j["adapter"] = adapter;
    j["n"] = records.size();
    j["overall"] = block("");
    ojson per_tier = ojson::object();
    for (const auto& t : tiers_of(records)) per_tier[t] = block(t);
    j["per_tier"] = std::move(per_tier);
    std::map<std::string, std::size_t> hist;
    std::size_t adapter_failures = 0;
    for (const auto& r : records) {
        ++hist[error_key(r.eval)];
        adapter_failures += r.adapter_error.has_value();
    }
    j["error_histogram"] = hist;
    j["adapter_failures"] = adapter_failures;
    return j;
}

/// Artifact root: explicit path, else $SHAPECODE_RUNS_DIR, else "runs".
inline fs::path runs_root(const std::optional<fs::path>& explicit_root = std::nullopt) {
    if (explicit_root) return *explicit_root;
    if (const char* env = std::getenv("SHAPECODE_RUNS_DIR"); env && *env) return env;
    return "runs";
}

inline std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
    return buf;
}

inline std::string sanitize_name(std::string_view name) {
    std::string out;
    for (char c : name) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.') ? c : '-';
    return out;
}

struct RunOptions {
    std::optional<fs::path> out_root;
    std::size_t parallelism = 1;
    bool verify_hashes = true;
    std::optional<std::string> resume_run_id;  // continue an interrupted run
    std::string prompt = default_prompt();
};

struct RunArtifact {
    std::string run_id;
    fs::path run_dir;
    ojson run_config;
    std::vector<SampleRun> records;  // sorted by sample_id
    ojson summary;
};

class RunError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void write_json_atomic(const fs::path& path, const ojson& j) {
    const fs::path tmp = path.string() + ".tmp";
    write_text_file(tmp, j.dump(2) + "\n");
    fs::rename(tmp, path);
}

/// Loads every complete per-sample record in a run directory. Partial or
/// corrupt files (e.g. from a killed process) are ignored.
inline std::vector<SampleRun> load_sample_runs(const fs::path& run_dir) {
    std::vector<SampleRun> out;
    const fs::path dir = run_dir / "samples";
    if (!fs::exists(dir)) return out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() != ".json") continue;
        try {
            out.push_back(sample_run_from_json(nlohmann::json::parse(read_text_file(entry.path()))));
        } catch (const std::exception&) {
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.sample_id < b.sample_id; });
    return out;
}

inline RunArtifact load_run(const fs::path& run_dir) {
    if (!fs::exists(run_dir / "run_config.json")) throw RunError("not a run directory: " + run_dir.string());
    RunArtifact a;
    a.run_dir = run_dir;
    a.run_config = ojson::parse(read_text_file(run_dir / "run_config.json"));
    a.run_id = a.run_config.at("run_id").get<std::string>();
    a.records = load_sample_runs(run_dir);
    if (fs::exists(run_dir / "summary.json")) a.summary = ojson::parse(read_text_file(run_dir / "summary.json"));
    return a;
}

/// Runs an adapter over every sample of a split. Per-sample records are
/// written as each sample finishes; summary.json is written last.
inline RunArtifact run_split(const fs::path& split_dir, const AdapterSpec& adapter, const RunOptions& opts = {}) {
    validate_adapter(adapter);
    const Manifest manifest = load_manifest(split_dir);
    bool verified = false;
    if (opts.verify_hashes) {
        const VerifyReport report = verify_dataset(split_dir);
        if (!report.ok()) throw RunError("dataset hash verification failed for " + report.mismatches.front().sample_id);
        verified = true;
    }

    const fs::path root = runs_root(opts.out_root);
    RunArtifact art;
    if (opts.resume_run_id) {
        art.run_id = *opts.resume_run_id;
        art.run_dir = root / art.run_id;
        if (!fs::exists(art.run_dir / "run_config.json")) throw RunError("cannot resume, no run at " + art.run_dir.string());
    } else {
        const std::string base = utc_timestamp() + "_" + sanitize_name(adapter.name);
        art.run_id = base;
        for (int k = 2; fs::exists(root / art.run_id); ++k) art.run_id = base + "-" + std::to_string(k);
        art.run_dir = root / art.run_id;
    }
    fs::create_directories(art.run_dir / "samples");

    const fs::path prompt_file = fs::absolute(art.run_dir / "prompt.txt");
    if (opts.resume_run_id) {
        art.run_config = ojson::parse(read_text_file(art.run_dir / "run_config.json"));
    } else {
        write_text_file(prompt_file, opts.prompt);
        ojson cfg;
        cfg["run_id"] = art.run_id;
        cfg["tool_version"] = kVersion;
        cfg["adapter"] = to_json(adapter);
        cfg["prompt"] = {{"file", "prompt.txt"}, {"sha256", sha256_hex(opts.prompt)}, {"text", opts.prompt}};
        cfg["split"] = {{"name", manifest.split},
                        {"dir", fs::absolute(split_dir).lexically_normal().string()},
                        {"manifest_sha256", sha256_hex(read_text_file(split_dir / kManifestFile))},
                        {"samples", manifest.samples.size()},
                        {"hashes_verified", verified}};
        cfg["parallelism"] = opts.parallelism;
        write_json_atomic(art.run_dir / "run_config.json", cfg);
        art.run_config = std::move(cfg);
    }
    const std::string prompt_sha = art.run_config.at("prompt").at("sha256").get<std::string>();

    std::set<std::string> done;
    for (const auto& r : load_sample_runs(art.run_dir)) done.insert(r.sample_id);
    std::vector<std::pair<std::string, ManifestEntry>> pending;
    for (const auto& [id, e] : manifest.samples)
        if (!done.count(id)) pending.emplace_back(id, e);

    parallel_for(pending.size(), opts.parallelism, [&](std::size_t i) {
        const auto& [id, entry] = pending[i];
        const fs::path image = fs::absolute(split_dir / (id + ".png"));
        SampleRun s;
        s.sample_id = id;
        s.difficulty = entry.difficulty;
        s.request = {{"adapter", adapter.name}, {"image", image.string()}, {"prompt_sha256", prompt_sha}};
        const auto t0 = std::chrono::steady_clock::now();
        AdapterResponse resp = invoke_adapter(adapter, image, prompt_file);
        s.latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        s.attempt_count = resp.attempts;
        s.adapter_error = std::move(resp.error);
        s.raw_response = std::move(resp.raw);
        s.normalized_prediction = normalize_prediction(s.raw_response);
        s.eval = evaluate(s.normalized_prediction, read_png(image));
        write_json_atomic(art.run_dir / "samples" / (id + ".json"), to_json(s));
    });

    art.records = load_sample_runs(art.run_dir);
    if (art.records.size() != manifest.samples.size())
        throw RunError("run incomplete: " + std::to_string(art.records.size()) + " of " +
                       std::to_string(manifest.samples.size()) + " records");
    art.summary = summarize_records(art.run_id, adapter.name, art.records);
    write_json_atomic(art.run_dir / "summary.json", art.summary);
    return art;
}

}  // namespace shapecode
