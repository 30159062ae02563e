#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sylrate/errors.hpp"
#include "sylrate/metrics.hpp"
#include "sylrate/params.hpp"
#include "sylrate/peaks.hpp"
#include "sylrate/pso.hpp"
#include "sylrate/synth.hpp"

namespace {

using namespace sylrate;

// locale-independent shortest round-trip formatting
std::string fmt(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::ostream& open_output(std::ofstream& file, const std::string& path) {
    if (path.empty()) return std::cout;
    file.open(path);
    if (!file) throw IoError("cannot write output file: " + path);
    return file;
}

nlohmann::json detection_to_json(const std::string& id, const DetectionResult& det) {
    nlohmann::json doc;
    doc["id"] = id;
    doc["count"] = det.count;
    doc["speech_rate_sps"] = det.speech_rate_sps;
    auto& nuclei = doc["nuclei"];
    nuclei = nlohmann::json::array();
    for (const Peak& p : det.nuclei)
        nuclei.push_back({{"t", p.time_s}, {"value", p.value}, {"prominence", p.prominence}});
    return doc;
}

void detection_to_csv(std::ostream& os, const std::string& id, const DetectionResult& det) {
    os << "id,t,value,prominence\n";
    for (const Peak& p : det.nuclei)
        os << id << "," << fmt(p.time_s) << "," << fmt(p.value) << "," << fmt(p.prominence)
           << "\n";
}

DetectionResult run_detection(const AudioClip& clip, const ParamsFile& params) {
    const EnvelopeResult env = compute_envelope(clip, params.params.weights,
                                                params.pipeline_config);
    return detect_syllables(env.envelope, env.mask, params.params.prominence_threshold,
                            clip.duration_s());
}

std::vector<UtteranceEvalRow> evaluate_corpus(const Corpus& corpus, const ParamsFile& params) {
    std::vector<UtteranceEvalRow> rows;
    rows.reserve(corpus.utterances.size());
    for (const auto& rec : corpus.utterances) {
        const DetectionResult det = run_detection(rec.audio, params);
        std::vector<double> times;
        times.reserve(det.nuclei.size());
        for (const Peak& p : det.nuclei) times.push_back(p.time_s);
        UtteranceEvalRow row;
        row.id = rec.id;
        row.predicted = det.count;
        row.actual = rec.syllable_count;
        row.match = match_detections(times, rec.vowel_segments);
        row.speech_rate_sps = det.speech_rate_sps;
        rows.push_back(std::move(row));
    }
    std::sort(rows.begin(), rows.end(),
              [](const UtteranceEvalRow& a, const UtteranceEvalRow& b) { return a.id < b.id; });
    return rows;
}

void print_report_summary(std::ostream& os, const EvalReport& report) {
    os << "precision " << fmt(report.precision) << "  recall " << fmt(report.recall)
       << "  f_score " << fmt(report.f_score) << "\n"
       << "mae_count " << fmt(report.mae_count) << "  sr_error_rate_pct "
       << fmt(report.sr_error_rate_pct) << "  pearson_count_corr "
       << (report.pearson_count_corr ? fmt(*report.pearson_count_corr) : std::string("null"))
       << "\n";
}

void write_report_files(const EvalReport& report, const std::string& base) {
    nlohmann::json doc;
    doc["precision"] = report.precision;
    doc["recall"] = report.recall;
    doc["f_score"] = report.f_score;
    doc["mae_count"] = report.mae_count;
    doc["sr_error_rate_pct"] = report.sr_error_rate_pct;
    if (report.pearson_count_corr)
        doc["pearson_count_corr"] = *report.pearson_count_corr;
    else
        doc["pearson_count_corr"] = nullptr;
    auto& rows = doc["per_utterance"];
    rows = nlohmann::json::array();
    for (const auto& r : report.per_utterance)
        rows.push_back({{"id", r.id},
                        {"predicted", r.predicted},
                        {"actual", r.actual},
                        {"tp", r.match.true_positives},
                        {"fp", r.match.false_positives},
                        {"fn", r.match.false_negatives},
                        {"speech_rate_sps", r.speech_rate_sps}});
    std::ofstream json_out(base + ".json");
    if (!json_out) throw IoError("cannot write report: " + base + ".json");
    json_out << doc.dump(2) << "\n";

    std::ofstream csv(base + ".csv");
    if (!csv) throw IoError("cannot write report: " + base + ".csv");
    csv << "id,predicted,actual,tp,fp,fn,speech_rate_sps,precision,recall,f_score,"
           "mae_count,sr_error_rate_pct,pearson_count_corr\n";
    for (const auto& r : report.per_utterance) {
        const Prf prf = precision_recall_f(r.match);
        csv << r.id << "," << r.predicted << "," << r.actual << "," << r.match.true_positives
            << "," << r.match.false_positives << "," << r.match.false_negatives << ","
            << fmt(r.speech_rate_sps) << "," << fmt(prf.precision) << "," << fmt(prf.recall)
            << "," << fmt(prf.f_score) << ",,,\n";
    }
    int pred_sum = 0, actual_sum = 0, tp = 0, fp = 0, fn = 0;
    for (const auto& r : report.per_utterance) {
        pred_sum += r.predicted;
        actual_sum += r.actual;
        tp += r.match.true_positives;
        fp += r.match.false_positives;
        fn += r.match.false_negatives;
    }
    csv << "TOTAL," << pred_sum << "," << actual_sum << "," << tp << "," << fp << "," << fn
        << ",," << fmt(report.precision) << "," << fmt(report.recall) << ","
        << fmt(report.f_score) << "," << fmt(report.mae_count) << ","
        << fmt(report.sr_error_rate_pct) << ","
        << (report.pearson_count_corr ? fmt(*report.pearson_count_corr) : std::string())
        << "\n";
}

PsoConfig load_pso_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open pso config: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    PsoConfig config;
    try {
        if (doc.contains("n_particles")) config.n_particles = doc["n_particles"].get<int>();
        if (doc.contains("max_iterations"))
            config.max_iterations = doc["max_iterations"].get<int>();
        if (doc.contains("phi_p")) config.phi_p = doc["phi_p"].get<double>();
        if (doc.contains("phi_g")) config.phi_g = doc["phi_g"].get<double>();
        if (doc.contains("omega")) config.omega = doc["omega"].get<double>();
        if (doc.contains("seed")) config.seed = doc["seed"].get<std::uint64_t>();
        if (doc.contains("stagnation_window"))
            config.stagnation_window = doc["stagnation_window"].get<int>();
        if (doc.contains("stagnation_tol"))
            config.stagnation_tol = doc["stagnation_tol"].get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path + ": " + e.what());
    }
    config.validate();
    return config;
}

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// seeded Fisher-Yates, independent of the standard library's shuffle
void seeded_shuffle(std::vector<std::size_t>& order, std::uint64_t seed) {
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
    for (std::size_t i = order.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(uniform01(rng) * i);
        std::swap(order[i - 1], order[std::min(j, i - 1)]);
    }
}

struct DetectArgs {
    std::string wav, params, format = "json", out, config;
};

void cmd_detect(const DetectArgs& args) {
    ParamsFile params = load_params_file(args.params);
    if (!args.config.empty()) params.pipeline_config = load_pipeline_config(args.config);
    const AudioClip clip = read_wav(args.wav);
    const DetectionResult det = run_detection(clip, params);
    const std::string id = std::filesystem::path(args.wav).stem().string();

    std::ofstream file;
    std::ostream& os = open_output(file, args.out);
    if (args.format == "json")
        os << detection_to_json(id, det).dump(2) << "\n";
    else
        detection_to_csv(os, id, det);
}

struct OptimizeArgs {
    std::string manifest, cost = "inv_f", pso_config, out_params, trace_csv, config;
    std::uint64_t seed = 0;
    int train_size = 0; // 0 = whole corpus
    int threads = 1;
};

void cmd_optimize(const OptimizeArgs& args) {
    const Corpus full = load_corpus(args.manifest);
    PipelineConfig pipeline_config;
    if (!args.config.empty()) pipeline_config = load_pipeline_config(args.config);

    Corpus train;
    if (args.train_size > 0) {
        if (static_cast<std::size_t>(args.train_size) > full.utterances.size())
            throw ValidationError("optimize: --train-size exceeds corpus size");
        std::vector<std::size_t> order(full.utterances.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        seeded_shuffle(order, args.seed);
        for (int i = 0; i < args.train_size; ++i)
            train.utterances.push_back(full.utterances[order[static_cast<std::size_t>(i)]]);
    } else {
        train = full;
    }

    PsoConfig pso_config;
    if (!args.pso_config.empty()) pso_config = load_pso_config(args.pso_config);
    pso_config.seed = args.seed;

    const CostKind kind = args.cost == "mae" ? CostKind::mae : CostKind::inv_f;
    const TrainResult result = train_pipeline(train, kind, pipeline_config, pso_config,
                                              default_search_space(), args.threads);

    // params file plus run metadata (ignored by the loader)
    nlohmann::json doc;
    doc["weights"] = result.params.weights.w;
    doc["prominence_threshold"] = result.params.prominence_threshold;
    doc["cost_kind"] = args.cost;
    doc["seed"] = args.seed;
    doc["train_size"] = static_cast<int>(train.utterances.size());
    doc["best_cost"] = result.swarm.best_cost;
    doc["iterations_run"] = result.swarm.iterations_run;
    {
        nlohmann::json cfg;
        cfg["window_s"] = pipeline_config.window_s;
        cfg["hop_s"] = pipeline_config.hop_s;
        cfg["energy_threshold_db"] = pipeline_config.energy_threshold_db;
        cfg["smoothing_cutoff_hz"] = pipeline_config.smoothing_cutoff_hz;
        cfg["band_edges_hz"] = pipeline_config.band_edges_hz;
        cfg["transition_width_hz"] = pipeline_config.transition_width_hz;
        cfg["log_floor"] = pipeline_config.log_floor;
        doc["pipeline_config"] = cfg;
    }
    std::ofstream out(args.out_params);
    if (!out) throw IoError("cannot write params file: " + args.out_params);
    out << doc.dump(2) << "\n";

    if (!args.trace_csv.empty()) {
        std::ofstream trace(args.trace_csv);
        if (!trace) throw IoError("cannot write trace csv: " + args.trace_csv);
        trace << "iteration,best_cost\n";
        for (std::size_t i = 0; i < result.swarm.cost_trace.size(); ++i)
            trace << (i + 1) << "," << fmt(result.swarm.cost_trace[i]) << "\n";
    }

    ParamsFile params_file;
    params_file.params = result.params;
    params_file.pipeline_config = pipeline_config;
    const EvalReport report = build_eval_report(evaluate_corpus(train, params_file));
    std::cout << "optimized on " << train.utterances.size() << " utterances, cost " << args.cost
              << ", best cost " << fmt(result.swarm.best_cost) << " after "
              << result.swarm.iterations_run << " iterations\n";
    print_report_summary(std::cout, report);
}

struct EvaluateArgs {
    std::string manifest, params, report, config;
};

void cmd_evaluate(const EvaluateArgs& args) {
    ParamsFile params = load_params_file(args.params);
    if (!args.config.empty()) params.pipeline_config = load_pipeline_config(args.config);
    const Corpus corpus = load_corpus(args.manifest);
    const EvalReport report = build_eval_report(evaluate_corpus(corpus, params));
    if (!report.pearson_count_corr)
        std::cerr << "warning: Pearson count correlation is undefined for this corpus "
                     "(fewer than two utterances or constant counts); reported as null\n";
    write_report_files(report, args.report);
    print_report_summary(std::cout, report);
}

struct SynthArgs {
    std::string spec, out_dir;
    int n = 0;
    int min_syllables = 4;
    int max_syllables = 20;
    std::uint64_t seed = 0;
};

void cmd_synth(const SynthArgs& args) {
    SynthSpec spec;
    if (!args.spec.empty()) spec = load_synth_spec(args.spec);
    const Corpus corpus =
        gen_corpus(spec, args.n, args.min_syllables, args.max_syllables, args.seed);
    const std::string manifest = write_corpus(corpus, args.out_dir);
    std::cout << manifest << "\n";
}

struct TraceArgs {
    std::string wav, params, out, config;
};

void cmd_trace(const TraceArgs& args) {
    ParamsFile params = load_params_file(args.params);
    if (!args.config.empty()) params.pipeline_config = load_pipeline_config(args.config);
    const AudioClip clip = read_wav(args.wav);
    const PipelineConfig& config = params.pipeline_config;

    const FramedSignal frames = frame_signal(clip, config);
    const BandEnergyMatrix matrix =
        normalize_and_log(band_energies(frames, config), config, frames.frame_rate_hz());
    const SpeechMask mask = speech_mask(frames, config);
    const SonorityEnvelope raw = weighted_envelope(matrix, params.params.weights);
    const SonorityEnvelope smoothed = smooth(raw, config);
    const DetectionResult det = detect_syllables(smoothed, mask,
                                                 params.params.prominence_threshold,
                                                 clip.duration_s());
    std::vector<char> detected(smoothed.values.size(), 0);
    for (const Peak& p : det.nuclei) detected[static_cast<std::size_t>(p.frame_index)] = 1;

    std::ofstream out(args.out);
    if (!out) throw IoError("cannot write trace csv: " + args.out);
    out << "frame_time_s,e1,e2,e3,e4,e5,e6,e7,raw_envelope,smoothed_envelope,speech_flag,"
           "is_detected_nucleus\n";
    for (std::size_t f = 0; f < matrix.frames(); ++f) {
        out << fmt(f / frames.frame_rate_hz());
        for (int b = 0; b < kNumBands; ++b)
            out << "," << fmt(matrix.values[f][static_cast<std::size_t>(b)]);
        out << "," << fmt(raw.values[f]) << "," << fmt(smoothed.values[f]) << ","
            << int(mask.flags[f]) << "," << int(detected[f]) << "\n";
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Syllable nucleus detection and speech rate estimation"};
    app.require_subcommand(1);

    DetectArgs detect_args;
    auto* detect = app.add_subcommand("detect", "Detect syllable nuclei in a wav file");
    detect->add_option("--wav", detect_args.wav, "input wav (PCM16 mono)")->required();
    detect->add_option("--params", detect_args.params, "params file (JSON)")->required();
    detect->add_option("--format", detect_args.format, "output format")
        ->check(CLI::IsMember({"json", "csv"}));
    detect->add_option("--out", detect_args.out, "output file (default: stdout)");
    detect->add_option("--config", detect_args.config, "pipeline config override (JSON)");

    OptimizeArgs optimize_args;
    auto* optimize = app.add_subcommand("optimize", "Optimize band weights and threshold");
    optimize->add_option("--manifest", optimize_args.manifest, "corpus manifest (JSON)")
        ->required();
    optimize->add_option("--cost", optimize_args.cost, "cost function")
        ->check(CLI::IsMember({"inv_f", "mae"}));
    optimize->add_option("--pso-config", optimize_args.pso_config, "PSO settings (JSON)");
    optimize->add_option("--train-size", optimize_args.train_size,
                         "train on this many utterances after a seeded shuffle");
    optimize->add_option("--seed", optimize_args.seed, "random seed");
    optimize->add_option("--out-params", optimize_args.out_params, "output params file")
        ->required();
    optimize->add_option("--trace-csv", optimize_args.trace_csv, "convergence trace CSV");
    optimize->add_option("--config", optimize_args.config, "pipeline config override (JSON)");
    optimize->add_option("--threads", optimize_args.threads, "worker threads");

    EvaluateArgs evaluate_args;
    auto* evaluate = app.add_subcommand("evaluate", "Evaluate params against a corpus");
    evaluate->add_option("--manifest", evaluate_args.manifest, "corpus manifest (JSON)")
        ->required();
    evaluate->add_option("--params", evaluate_args.params, "params file (JSON)")->required();
    evaluate->add_option("--report", evaluate_args.report,
                         "report base path (writes .json and .csv)")
        ->required();
    evaluate->add_option("--config", evaluate_args.config, "pipeline config override (JSON)");

    SynthArgs synth_args;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus");
    synth->add_option("--spec", synth_args.spec, "synth spec (JSON)");
    synth->add_option("--n", synth_args.n, "number of utterances")->required();
    synth->add_option("--min-syllables", synth_args.min_syllables, "lower syllable count");
    synth->add_option("--max-syllables", synth_args.max_syllables, "upper syllable count");
    synth->add_option("--seed", synth_args.seed, "random seed");
    synth->add_option("--out", synth_args.out_dir, "output directory")->required();

    TraceArgs trace_args;
    auto* trace = app.add_subcommand("trace", "Per-frame pipeline trace CSV");
    trace->add_option("--wav", trace_args.wav, "input wav")->required();
    trace->add_option("--params", trace_args.params, "params file (JSON)")->required();
    trace->add_option("--out", trace_args.out, "output CSV")->required();
    trace->add_option("--config", trace_args.config, "pipeline config override (JSON)");

    detect->callback([&] { cmd_detect(detect_args); });
    optimize->callback([&] { cmd_optimize(optimize_args); });
    evaluate->callback([&] { cmd_evaluate(evaluate_args); });
    synth->callback([&] { cmd_synth(synth_args); });
    trace->callback([&] { cmd_trace(trace_args); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    } catch (const sylrate::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
