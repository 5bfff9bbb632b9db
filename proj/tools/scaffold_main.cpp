#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "scaffold/geometry.hpp"
#include "scaffold/log.hpp"
#include "scaffold/metrics.hpp"
#include "scaffold/qa.hpp"
#include "scaffold/scene.hpp"
#include "scaffold/scene_graph.hpp"
#include "scaffold/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace scaffold;

namespace {

// Exit codes: 0 success, 1 validation failure, 2 usage/config, 3 I/O.
constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("read failure on '" + path + "'");
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    const fs::path p(path);
    if (p.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(p.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw IoError("write failure on '" + path + "'");
}

std::string fnv1a_hex(const std::string& data) {
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// Tool version, effective config, and input content hashes. Deliberately free
// of timestamps and worker counts so reruns are byte-identical.
json make_meta(const std::string& command, json config,
               const std::vector<std::pair<std::string, const std::string*>>& inputs) {
    json meta;
    meta["tool"] = kToolName;
    meta["version"] = kVersion;
    meta["command"] = command;
    meta["config"] = std::move(config);
    json in = json::object();
    for (const auto& [path, content] : inputs) in[path] = "fnv1a64:" + fnv1a_hex(*content);
    meta["inputs"] = std::move(in);
    return meta;
}

template <typename Fn>
void parallel_for(size_t n, size_t jobs, Fn&& fn) {
    jobs = std::max<size_t>(1, std::min(jobs, n));
    if (jobs <= 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    std::vector<std::thread> workers;
    workers.reserve(jobs);
    for (size_t w = 0; w < jobs; ++w) {
        workers.emplace_back([&] {
            for (;;) {
                const size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : workers) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

std::vector<ReferralKind> parse_policy(const std::string& spec) {
    std::vector<ReferralKind> policy;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) policy.push_back(referral_kind_from_string(item));
    }
    if (policy.empty()) throw Error("policy must name at least one strategy");
    return policy;
}

json frame_json(const UnifiedFrame& frame) {
    json j;
    j["origin"] = {frame.origin.x, frame.origin.y, frame.origin.z};
    j["x_axis"] = {frame.x_axis.x, frame.x_axis.y, frame.x_axis.z};
    j["y_axis"] = {frame.y_axis.x, frame.y_axis.y, frame.y_axis.z};
    j["up"] = {frame.up.x, frame.up.y, frame.up.z};
    return j;
}

// Per-scene output routing: one scene writes --out itself, several write
// <out>/<scene_id><suffix>.
std::string scene_out_path(const std::string& out, size_t n_scenes,
                           const std::string& scene_id, const std::string& suffix) {
    if (n_scenes == 1) return out;
    return (fs::path(out) / (scene_id + suffix)).string();
}

struct SceneInput {
    std::string path;
    std::string content;
    Scene scene;
};

std::vector<SceneInput> load_scenes(const std::vector<std::string>& paths) {
    std::vector<SceneInput> scenes;
    scenes.reserve(paths.size());
    for (const auto& path : paths) {
        SceneInput in;
        in.path = path;
        in.content = read_file(path);
        try {
            in.scene = parse_scene(in.content);
        } catch (const Error& e) {
            throw Error(std::string("'") + path + "': " + e.what());
        }
        scenes.push_back(std::move(in));
    }
    return scenes;
}

struct BuildGraphOpts {
    std::vector<std::string> scenes;
    double delta = 3.0;
    std::string out;
    size_t jobs = 1;
};

int cmd_build_graph(const BuildGraphOpts& opt) {
    const auto scenes = load_scenes(opt.scenes);
    std::vector<std::string> docs(scenes.size());
    std::vector<bool> ok(scenes.size(), true);

    parallel_for(scenes.size(), opt.jobs, [&](size_t i) {
        const SceneGraph graph = build_incremental(scenes[i].scene, opt.delta);
        const ValidationReport report = validate(graph);
        ok[i] = report.connected && report.rigid;

        json doc;
        doc["_meta"] = make_meta("build-graph", {{"delta", opt.delta}},
                                 {{scenes[i].path, &scenes[i].content}});
        doc["scene_id"] = graph.scene_id;
        doc["delta"] = graph.delta;
        doc["placement_order"] = graph.placement_order;
        doc["lcms"] = json::array();
        for (const auto& lcm : graph.lcms) doc["lcms"].push_back(lcm_to_json(lcm));
        doc["validation"] = report_to_json(report);
        docs[i] = doc.dump(2) + "\n";
    });

    bool all_ok = true;
    for (size_t i = 0; i < scenes.size(); ++i) {
        write_file(scene_out_path(opt.out, scenes.size(), scenes[i].scene.scene_id,
                                  ".graph.json"),
                   docs[i]);
        if (!ok[i]) {
            std::cerr << "error: graph for scene '" << scenes[i].scene.scene_id
                      << "' failed validation\n";
            all_ok = false;
        }
    }
    return all_ok ? kExitOk : kExitValidation;
}

struct EmitQaOpts {
    std::vector<std::string> scenes;
    std::vector<std::string> graphs;
    std::string task = "scenegraph";
    std::string policy = "proximity,direction,temporal";
    uint64_t seed = 0;
    std::string out;
    size_t jobs = 1;
};

int cmd_emit_qa(const EmitQaOpts& opt) {
    const std::vector<ReferralKind> policy = parse_policy(opt.policy);
    const auto scenes = load_scenes(opt.scenes);

    std::vector<std::pair<std::string, std::string>> graph_files;  // path, content
    std::map<std::string, SceneGraph> graphs;
    for (const auto& path : opt.graphs) {
        std::string content = read_file(path);
        SceneGraph graph = parse_graph(content);
        graph_files.emplace_back(path, std::move(content));
        graphs[graph.scene_id] = std::move(graph);
    }

    const bool want_scenegraph = opt.task == "scenegraph" || opt.task == "both";
    const bool want_grounding = opt.task == "grounding" || opt.task == "both";

    std::vector<std::vector<QARecord>> per_scene(scenes.size());
    parallel_for(scenes.size(), opt.jobs, [&](size_t i) {
        const Scene& scene = scenes[i].scene;
        std::vector<QARecord> records;
        if (want_scenegraph) {
            const auto it = graphs.find(scene.scene_id);
            if (it == graphs.end())
                throw Error("no graph provided for scene '" + scene.scene_id + "'");
            auto part = emit_scenegraph_qa(it->second, scene);
            records.insert(records.end(), part.begin(), part.end());
        }
        if (want_grounding) {
            auto part = emit_grounding_qa(scene, policy, opt.seed);
            records.insert(records.end(), part.begin(), part.end());
        }
        per_scene[i] = std::move(records);
    });

    std::vector<QARecord> all;
    for (auto& part : per_scene) all.insert(all.end(), part.begin(), part.end());

    std::vector<std::pair<std::string, const std::string*>> inputs;
    for (const auto& s : scenes) inputs.emplace_back(s.path, &s.content);
    for (const auto& [path, content] : graph_files) inputs.emplace_back(path, &content);
    const json meta = make_meta(
        "emit-qa", {{"task", opt.task}, {"policy", opt.policy}, {"seed", opt.seed}}, inputs);

    std::string out = json{{"_meta", meta}}.dump() + "\n";
    out += serialize_jsonl(all);
    write_file(opt.out, out);
    std::cout << all.size() << " records written to " << opt.out << "\n";
    return kExitOk;
}

struct NormalizeOpts {
    std::vector<std::string> scenes;
    std::string out;
    size_t jobs = 1;
};

int cmd_normalize(const NormalizeOpts& opt) {
    const auto scenes = load_scenes(opt.scenes);
    std::vector<std::string> docs(scenes.size());

    parallel_for(scenes.size(), opt.jobs, [&](size_t i) {
        const Scene& scene = scenes[i].scene;
        const UnifiedFrame frame = scene_unified_frame(scene);

        json boxes = json::array();
        json skipped = json::array();
        for (const auto& obj : scene.objects) {
            try {
                const Box7DoF box = box9_to_box7(frame, obj.box);
                json jb;
                jb["id"] = obj.id;
                jb["category"] = obj.category;
                jb["center"] = {box.center.x, box.center.y, box.center.z};
                jb["size"] = {box.size.l, box.size.w, box.size.h};
                jb["yaw"] = box.yaw;
                boxes.push_back(std::move(jb));
            } catch (const Error& e) {
                skipped.push_back({{"id", obj.id}, {"reason", e.what()}});
            }
        }

        json doc;
        doc["_meta"] =
            make_meta("normalize", json::object(), {{scenes[i].path, &scenes[i].content}});
        doc["scene_id"] = scene.scene_id;
        doc["frame"] = frame_json(frame);
        doc["boxes"] = std::move(boxes);
        doc["skipped"] = std::move(skipped);
        docs[i] = doc.dump(2) + "\n";
    });

    for (size_t i = 0; i < scenes.size(); ++i)
        write_file(scene_out_path(opt.out, scenes.size(), scenes[i].scene.scene_id,
                                  ".boxes.json"),
                   docs[i]);
    return kExitOk;
}

struct ReconstructOpts {
    std::string graph;
    std::string reference;
    bool quantized = false;
    std::string out;
};

int cmd_reconstruct(const ReconstructOpts& opt) {
    const std::string graph_content = read_file(opt.graph);
    const SceneGraph graph = parse_graph(graph_content);
    const auto layout = reconstruct(graph, !opt.quantized);

    json doc;
    json config = {{"quantized", opt.quantized}};
    std::vector<std::pair<std::string, const std::string*>> inputs = {
        {opt.graph, &graph_content}};

    json positions = json::object();
    for (const auto& [id, p] : layout) positions[id] = {p.x, p.y};
    doc["scene_id"] = graph.scene_id;
    doc["mode"] = opt.quantized ? "quantized" : "continuous";
    doc["positions"] = std::move(positions);

    std::string reference_content;
    if (!opt.reference.empty()) {
        reference_content = read_file(opt.reference);
        const Scene ref_scene = parse_scene(reference_content);
        const std::vector<Vec2> bev = bev_centers(ref_scene);
        std::map<std::string, Vec2> ref_layout;
        for (size_t i = 0; i < ref_scene.objects.size(); ++i)
            ref_layout[ref_scene.objects[i].id] = bev[i];
        for (const auto& [id, p] : layout)
            if (!ref_layout.count(id))
                throw Error("reference scene lacks object '" + id + "'");
        std::map<std::string, Vec2> ref_subset;
        for (const auto& [id, p] : layout) ref_subset[id] = ref_layout[id];
        const ProcrustesResult aligned = procrustes_align(layout, ref_subset);
        doc["residual"] = aligned.rms_residual;
        inputs.emplace_back(opt.reference, &reference_content);
        std::printf("residual: %.9g\n", aligned.rms_residual);
    }

    doc["_meta"] = make_meta("reconstruct", std::move(config), inputs);
    if (!opt.out.empty()) write_file(opt.out, doc.dump(2) + "\n");
    std::printf("reconstructed %zu positions (%s)\n", layout.size(),
                opt.quantized ? "quantized" : "continuous");
    return kExitOk;
}

struct ValidateOpts {
    std::vector<std::string> graphs;
    std::string out;
};

int cmd_validate(const ValidateOpts& opt) {
    bool all_ok = true;
    json reports = json::array();
    std::vector<std::pair<std::string, std::string>> contents;
    for (const auto& path : opt.graphs) contents.emplace_back(path, read_file(path));

    for (const auto& [path, content] : contents) {
        const SceneGraph graph = parse_graph(content);
        std::set<std::string> ids(graph.placement_order.begin(), graph.placement_order.end());
        for (const auto& lcm : graph.lcms) {
            ids.insert(lcm.anchor_a_id);
            ids.insert(lcm.anchor_b_id);
            ids.insert(lcm.target_id);
        }
        const ValidationReport report = validate(graph.lcms, ids);
        std::cout << graph.scene_id << ": connected=" << (report.connected ? "true" : "false")
                  << " rigid=" << (report.rigid ? "true" : "false")
                  << " components=" << report.components.size() << " stalled_at="
                  << (report.stalled_at ? std::to_string(*report.stalled_at) : "-") << "\n";
        json entry = report_to_json(report);
        entry["scene_id"] = graph.scene_id;
        reports.push_back(std::move(entry));
        if (!report.connected || !report.rigid) all_ok = false;
    }

    if (!opt.out.empty()) {
        std::vector<std::pair<std::string, const std::string*>> inputs;
        for (const auto& [path, content] : contents) inputs.emplace_back(path, &content);
        json doc;
        doc["_meta"] = make_meta("validate", json::object(), inputs);
        doc["reports"] = std::move(reports);
        write_file(opt.out, doc.dump(2) + "\n");
    }
    return all_ok ? kExitOk : kExitValidation;
}

struct EvaluateOpts {
    std::string pred;
    std::string truth;
    std::string task = "auto";
    double bin_width = 0.0;  // 0 = per-task default
    std::string out;
};

int cmd_evaluate(const EvaluateOpts& opt) {
    const std::string pred_content = read_file(opt.pred);
    const std::string truth_content = read_file(opt.truth);
    const std::vector<QARecord> truth = parse_jsonl(truth_content);

    std::map<std::string, std::string> answers;
    {
        size_t start = 0, lineno = 0;
        while (start < pred_content.size()) {
            size_t end = pred_content.find('\n', start);
            if (end == std::string::npos) end = pred_content.size();
            const std::string line = pred_content.substr(start, end - start);
            start = end + 1;
            ++lineno;
            if (line.empty()) continue;
            json j;
            try {
                j = json::parse(line);
            } catch (const json::parse_error& e) {
                throw Error("prediction line " + std::to_string(lineno) + ": " + e.what());
            }
            if (j.contains("_meta")) continue;
            if (!j.contains("id") || !j.contains("answer_text"))
                throw Error("prediction line " + std::to_string(lineno) +
                            ": expected fields 'id' and 'answer_text'");
            answers[j["id"].get<std::string>()] = j["answer_text"].get<std::string>();
        }
    }

    const auto inputs = std::vector<std::pair<std::string, const std::string*>>{
        {opt.pred, &pred_content}, {opt.truth, &truth_content}};
    const json meta = make_meta(
        "evaluate", {{"task", opt.task}, {"bin_width", opt.bin_width}}, inputs);
    const std::string meta_line = "# " + meta.dump() + "\n";

    const auto emit_csv = [&](const std::string& name, const EvalSummary& summary) {
        write_file((fs::path(opt.out) / name).string(), meta_line + write_histogram_csv(summary));
    };
    const auto rate = [](size_t miss, size_t total) {
        return total == 0 ? 0.0 : static_cast<double>(miss) / static_cast<double>(total);
    };

    bool produced = false;
    if (opt.task == "cogmap" || opt.task == "auto") {
        std::vector<GridCoord> preds, gts;
        size_t total = 0, no_parse = 0;
        for (const auto& rec : truth) {
            if (rec.task != QATask::scenegraph_qa) continue;
            ++total;
            const auto it = answers.find(rec.record_id());
            if (it == answers.end()) {
                ++no_parse;
                continue;
            }
            try {
                preds.push_back(parse_grid_answer(it->second));
            } catch (const Error&) {
                ++no_parse;
                continue;
            }
            gts.push_back(std::get<GridCoord>(rec.ground_truth));
        }
        if (total > 0) {
            if (preds.empty()) throw Error("cogmap: no parseable predictions");
            const EvalSummary summary =
                cogmap_error(preds, gts, opt.bin_width > 0.0 ? opt.bin_width : 0.5);
            emit_csv("cogmap_error.csv", summary);
            std::printf("cogmap: n=%zu no-parse rate: %.2f mean=%.6g median=%.6g\n",
                        summary.count, rate(no_parse, total), summary.mean, summary.median);
            produced = true;
        } else if (opt.task == "cogmap") {
            throw Error("truth file has no scenegraph_qa records");
        }
    }
    if (opt.task == "grounding" || opt.task == "auto") {
        std::vector<Box7DoF> preds, gts;
        size_t total = 0, no_parse = 0;
        for (const auto& rec : truth) {
            if (rec.task != QATask::grounding_qa) continue;
            ++total;
            const auto it = answers.find(rec.record_id());
            if (it == answers.end()) {
                ++no_parse;
                continue;
            }
            try {
                preds.push_back(parse_box7_answer(it->second));
            } catch (const Error&) {
                ++no_parse;
                continue;
            }
            gts.push_back(std::get<Box7DoF>(rec.ground_truth));
        }
        if (total > 0) {
            if (preds.empty()) throw Error("grounding: no parseable predictions");
            const double bw = opt.bin_width > 0.0 ? opt.bin_width : 0.1;
            const GroundingErrorSummary summary = grounding_errors(preds, gts, bw, bw, bw);
            emit_csv("grounding_center.csv", summary.center);
            emit_csv("grounding_size.csv", summary.size);
            emit_csv("grounding_yaw.csv", summary.yaw);
            std::printf(
                "grounding: n=%zu no-parse rate: %.2f center_mean=%.6g size_mean=%.6g "
                "yaw_mean=%.6g\n",
                summary.center.count, rate(no_parse, total), summary.center.mean,
                summary.size.mean, summary.yaw.mean);
            produced = true;
        } else if (opt.task == "grounding") {
            throw Error("truth file has no grounding_qa records");
        }
    }
    if (!produced) throw Error("truth file has no usable records");
    return kExitOk;
}

struct SampleOpts {
    std::string scene;
    size_t k = 3;
    uint64_t seed = 0;
    std::string out;
};

int cmd_sample_triplets(const SampleOpts& opt) {
    const std::string content = read_file(opt.scene);
    const Scene scene = parse_scene(content);
    const auto lcms = sample_random_triplets(scene, opt.k, opt.seed);

    std::set<std::string> ids;
    for (const auto& obj : scene.objects) ids.insert(obj.id);
    const ValidationReport report = validate(lcms, ids);
    std::cout << scene.scene_id << ": sampled " << lcms.size()
              << " triplets, connected=" << (report.connected ? "true" : "false")
              << " rigid=" << (report.rigid ? "true" : "false")
              << " components=" << report.components.size() << "\n";

    if (!opt.out.empty()) {
        json doc;
        doc["_meta"] = make_meta("sample-triplets", {{"k", opt.k}, {"seed", opt.seed}},
                                 {{opt.scene, &content}});
        doc["scene_id"] = scene.scene_id;
        doc["lcms"] = json::array();
        for (const auto& lcm : lcms) doc["lcms"].push_back(lcm_to_json(lcm));
        doc["validation"] = report_to_json(report);
        write_file(opt.out, doc.dump(2) + "\n");
    }
    return kExitOk;
}

template <typename Fn>
int run_guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Scene-graph and 7-DoF grounding toolkit: builds cognitive-map scene "
                 "graphs, emits QA datasets, and scores model answers."};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    BuildGraphOpts build_opt;
    auto* build = app.add_subcommand("build-graph",
                                     "Build an incremental scene graph from a scene file");
    build->add_option("--scene", build_opt.scenes, "Scene JSON file(s)")->required();
    build->add_option("--delta", build_opt.delta, "Distance threshold, meters")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    build->add_option("--out", build_opt.out, "Output file (or directory for several scenes)")
        ->required();
    build->add_option("--jobs", build_opt.jobs, "Parallel scene workers")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    EmitQaOpts emit_opt;
    auto* emit = app.add_subcommand("emit-qa", "Emit QA records as JSONL");
    emit->add_option("--scene", emit_opt.scenes, "Scene JSON file(s)")->required();
    emit->add_option("--graph", emit_opt.graphs, "Graph JSON file(s) matched by scene_id");
    emit->add_option("--task", emit_opt.task, "scenegraph | grounding | both")
        ->check(CLI::IsMember({"scenegraph", "grounding", "both"}))
        ->capture_default_str();
    emit->add_option("--policy", emit_opt.policy, "Referral strategy order (comma separated)")
        ->check([](const std::string& value) -> std::string {
            try {
                parse_policy(value);
            } catch (const Error& e) {
                return e.what();
            }
            return {};
        })
        ->capture_default_str();
    emit->add_option("--seed", emit_opt.seed, "Sampling seed")->capture_default_str();
    emit->add_option("--out", emit_opt.out, "Output JSONL file")->required();
    emit->add_option("--jobs", emit_opt.jobs, "Parallel scene workers")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    NormalizeOpts norm_opt;
    auto* norm = app.add_subcommand("normalize",
                                    "Convert scene boxes to 7-DoF in the unified frame");
    norm->add_option("--scene", norm_opt.scenes, "Scene JSON file(s)")->required();
    norm->add_option("--out", norm_opt.out, "Output file (or directory for several scenes)")
        ->required();
    norm->add_option("--jobs", norm_opt.jobs, "Parallel scene workers")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    ReconstructOpts rec_opt;
    auto* rec = app.add_subcommand("reconstruct", "Reconstruct a BEV layout from a graph");
    rec->add_option("--graph", rec_opt.graph, "Graph JSON file")->required();
    rec->add_option("--reference", rec_opt.reference,
                    "Reference scene file; prints the similarity-aligned RMS residual");
    rec->add_flag("--quantized", rec_opt.quantized, "Decode from grid cells, not continuous");
    rec->add_option("--out", rec_opt.out, "Output layout JSON file");

    ValidateOpts val_opt;
    auto* val = app.add_subcommand("validate", "Check graph connectivity and rigidity");
    val->add_option("--graph", val_opt.graphs, "Graph JSON file(s)")->required();
    val->add_option("--out", val_opt.out, "Optional report JSON file");

    EvaluateOpts eval_opt;
    auto* eval = app.add_subcommand("evaluate", "Score model answers against ground truth");
    eval->add_option("--pred", eval_opt.pred, "Predictions JSONL ({id, answer_text})")
        ->required();
    eval->add_option("--truth", eval_opt.truth, "Ground-truth JSONL (emit-qa output)")
        ->required();
    eval->add_option("--task", eval_opt.task, "cogmap | grounding | auto")
        ->check(CLI::IsMember({"cogmap", "grounding", "auto"}))
        ->capture_default_str();
    eval->add_option("--bin-width", eval_opt.bin_width, "Histogram bin width override")
        ->check(CLI::PositiveNumber);
    eval->add_option("--out", eval_opt.out, "Output directory for CSV files")->required();

    SampleOpts sample_opt;
    auto* sample = app.add_subcommand("sample-triplets",
                                      "Sample random triplets (failure-mode demo)");
    sample->add_option("--scene", sample_opt.scene, "Scene JSON file")->required();
    sample->add_option("--k", sample_opt.k, "Number of triplets")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sample->add_option("--seed", sample_opt.seed, "Sampling seed")->capture_default_str();
    sample->add_option("--out", sample_opt.out, "Optional output JSON file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    if (build->parsed()) return run_guarded([&] { return cmd_build_graph(build_opt); });
    if (emit->parsed()) return run_guarded([&] { return cmd_emit_qa(emit_opt); });
    if (norm->parsed()) return run_guarded([&] { return cmd_normalize(norm_opt); });
    if (rec->parsed()) return run_guarded([&] { return cmd_reconstruct(rec_opt); });
    if (val->parsed()) return run_guarded([&] { return cmd_validate(val_opt); });
    if (eval->parsed()) return run_guarded([&] { return cmd_evaluate(eval_opt); });
    if (sample->parsed()) return run_guarded([&] { return cmd_sample_triplets(sample_opt); });
    return kExitUsage;
}
