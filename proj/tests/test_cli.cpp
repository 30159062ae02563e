#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include <doctest.h>
#include <json.hpp>

#include "oracles.hpp"
#include "sylrate/audio_io.hpp"

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunResult run_cli(const std::string& args, const oracle::TempDir& dir) {
    const std::string out_path = dir.file("stdout.txt");
    const std::string err_path = dir.file("stderr.txt");
    const std::string cmd =
        std::string(SYLRATE_CLI_PATH) + " " + args + " > " + out_path + " 2> " + err_path;
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out_path);
    r.err = slurp(err_path);
    return r;
}

// spec with silent gaps and a negligible noise floor: detections are exact
void write_clean_spec(const std::string& path) {
    std::ofstream out(path);
    out << R"({"fricative_prob": 0.0, "noise_db": -120.0})" << "\n";
}

void write_oracle_params(const std::string& path, double threshold) {
    nlohmann::json doc;
    doc["weights"] = {1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0};
    doc["prominence_threshold"] = threshold;
    std::ofstream out(path);
    out << doc.dump(2) << "\n";
}

int count_lines(const std::string& text) {
    int n = 0;
    for (const char c : text)
        if (c == '\n') ++n;
    return n;
}

} // namespace

TEST_CASE("cli synth: deterministic corpus generation") {
    oracle::TempDir dir("cli_synth");
    const std::string spec = dir.file("spec.json");
    write_clean_spec(spec);

    const RunResult a = run_cli("synth --spec " + spec + " --n 3 --seed 5 --min-syllables 4 "
                                "--max-syllables 6 --out " + dir.file("corpus_a"), dir);
    REQUIRE(a.exit_code == 0);
    const std::string manifest_a = dir.file("corpus_a/manifest.json");
    CHECK(a.out.find("manifest.json") != std::string::npos);
    REQUIRE(std::filesystem::exists(manifest_a));

    const RunResult b = run_cli("synth --spec " + spec + " --n 3 --seed 5 --min-syllables 4 "
                                "--max-syllables 6 --out " + dir.file("corpus_b"), dir);
    REQUIRE(b.exit_code == 0);
    CHECK(slurp(manifest_a) == slurp(dir.file("corpus_b/manifest.json")));
    CHECK(slurp(dir.file("corpus_a/utt_0000.wav")) == slurp(dir.file("corpus_b/utt_0000.wav")));
    CHECK(slurp(dir.file("corpus_a/utt_0002.wav")) == slurp(dir.file("corpus_b/utt_0002.wav")));

    const nlohmann::json manifest = nlohmann::json::parse(slurp(manifest_a));
    CHECK(manifest["utterances"].size() == 3);
}

TEST_CASE("cli synth: zero utterances is an input error") {
    oracle::TempDir dir("cli_synth0");
    const RunResult r = run_cli("synth --n 0 --seed 1 --out " + dir.file("corpus"), dir);
    CHECK(r.exit_code == 1);
    CHECK(!r.err.empty());
}

TEST_CASE("cli detect: counts syllables with oracle params") {
    oracle::TempDir dir("cli_detect");
    const std::string spec = dir.file("spec.json");
    write_clean_spec(spec);
    REQUIRE(run_cli("synth --spec " + spec + " --n 1 --seed 11 --min-syllables 5 "
                    "--max-syllables 5 --out " + dir.file("corpus"), dir)
                .exit_code == 0);
    const std::string wav = dir.file("corpus/utt_0000.wav");
    const std::string params = dir.file("params.json");
    write_oracle_params(params, 5.0);

    SUBCASE("json output") {
        const RunResult r = run_cli("detect --wav " + wav + " --params " + params, dir);
        REQUIRE(r.exit_code == 0);
        const nlohmann::json doc = nlohmann::json::parse(r.out);
        CHECK(doc["id"] == "utt_0000");
        CHECK(doc["count"] == 5);
        CHECK(doc["nuclei"].size() == 5);
        CHECK(doc["speech_rate_sps"].get<double>() > 0.0);
    }
    SUBCASE("csv output to a file") {
        const std::string out_csv = dir.file("det.csv");
        const RunResult r = run_cli("detect --wav " + wav + " --params " + params +
                                    " --format csv --out " + out_csv, dir);
        REQUIRE(r.exit_code == 0);
        const std::string csv = slurp(out_csv);
        CHECK(count_lines(csv) == 6); // header + one row per nucleus
        CHECK(csv.rfind("id,t,value,prominence\n", 0) == 0);
    }
    SUBCASE("missing params file names the path") {
        const RunResult r = run_cli("detect --wav " + wav + " --params " + dir.file("nope.json"),
                                    dir);
        CHECK(r.exit_code == 1);
        CHECK(r.err.find("nope.json") != std::string::npos);
    }
}

TEST_CASE("cli optimize: deterministic across reruns and thread counts") {
    oracle::TempDir dir("cli_opt");
    const std::string spec = dir.file("spec.json");
    write_clean_spec(spec);
    REQUIRE(run_cli("synth --spec " + spec + " --n 8 --seed 3 --min-syllables 3 "
                    "--max-syllables 7 --out " + dir.file("corpus"), dir)
                .exit_code == 0);
    const std::string manifest = dir.file("corpus/manifest.json");
    {
        std::ofstream pso(dir.file("pso.json"));
        pso << R"({"n_particles": 12, "max_iterations": 20})" << "\n";
    }
    const std::string common = "optimize --manifest " + manifest + " --cost inv_f --seed 7 " +
                               "--pso-config " + dir.file("pso.json");

    const RunResult a = run_cli(common + " --out-params " + dir.file("pa.json") +
                                " --trace-csv " + dir.file("ta.csv") + " --threads 1", dir);
    REQUIRE(a.exit_code == 0);
    CHECK(a.out.find("f_score") != std::string::npos);

    const RunResult b = run_cli(common + " --out-params " + dir.file("pb.json") +
                                " --trace-csv " + dir.file("tb.csv") + " --threads 1", dir);
    REQUIRE(b.exit_code == 0);
    CHECK(slurp(dir.file("pa.json")) == slurp(dir.file("pb.json")));
    CHECK(slurp(dir.file("ta.csv")) == slurp(dir.file("tb.csv")));

    const RunResult c = run_cli(common + " --out-params " + dir.file("pc.json") +
                                " --trace-csv " + dir.file("tc.csv") + " --threads 4", dir);
    REQUIRE(c.exit_code == 0);
    CHECK(slurp(dir.file("pa.json")) == slurp(dir.file("pc.json")));
    CHECK(slurp(dir.file("ta.csv")) == slurp(dir.file("tc.csv")));

    // metadata records the cost kind; the params file is loadable
    const nlohmann::json params = nlohmann::json::parse(slurp(dir.file("pa.json")));
    CHECK(params["cost_kind"] == "inv_f");
    CHECK(params["weights"].size() == 7);
    const std::string trace = slurp(dir.file("ta.csv"));
    CHECK(trace.rfind("iteration,best_cost\n", 0) == 0);
    CHECK(count_lines(trace) >= 2);

    SUBCASE("train-size subsampling and the mae cost flag") {
        const RunResult d = run_cli("optimize --manifest " + manifest +
                                    " --cost mae --seed 7 --train-size 5 --pso-config " +
                                    dir.file("pso.json") + " --out-params " +
                                    dir.file("pd.json"), dir);
        REQUIRE(d.exit_code == 0);
        const nlohmann::json pd = nlohmann::json::parse(slurp(dir.file("pd.json")));
        CHECK(pd["cost_kind"] == "mae");
        CHECK(pd["train_size"] == 5);

        const RunResult too_big = run_cli("optimize --manifest " + manifest +
                                          " --cost mae --seed 7 --train-size 99 --out-params " +
                                          dir.file("px.json"), dir);
        CHECK(too_big.exit_code == 1);
    }
}

TEST_CASE("cli evaluate") {
    oracle::TempDir dir("cli_eval");
    const std::string spec = dir.file("spec.json");
    write_clean_spec(spec);
    REQUIRE(run_cli("synth --spec " + spec + " --n 4 --seed 21 --min-syllables 4 "
                    "--max-syllables 8 --out " + dir.file("corpus"), dir)
                .exit_code == 0);
    const std::string manifest = dir.file("corpus/manifest.json");
    const std::string params = dir.file("params.json");
    write_oracle_params(params, 5.0);

    SUBCASE("oracle params give a perfect report") {
        const RunResult r = run_cli("evaluate --manifest " + manifest + " --params " + params +
                                    " --report " + dir.file("report"), dir);
        REQUIRE(r.exit_code == 0);
        const nlohmann::json doc = nlohmann::json::parse(slurp(dir.file("report.json")));
        CHECK(doc["precision"].get<double>() == 1.0);
        CHECK(doc["recall"].get<double>() == 1.0);
        CHECK(doc["f_score"].get<double>() == 1.0);
        CHECK(doc["mae_count"].get<double>() == 0.0);
        CHECK(doc["per_utterance"].size() == 4);
        const std::string csv = slurp(dir.file("report.csv"));
        CHECK(count_lines(csv) == 6); // header + 4 rows + TOTAL
        CHECK(csv.find("TOTAL,") != std::string::npos);

        // end-to-end consistency: detect count equals the evaluate row
        const RunResult det = run_cli("detect --wav " + dir.file("corpus/utt_0001.wav") +
                                      " --params " + params, dir);
        REQUIRE(det.exit_code == 0);
        const int detect_count = nlohmann::json::parse(det.out)["count"].get<int>();
        for (const auto& row : doc["per_utterance"])
            if (row["id"] == "utt_0001") CHECK(row["predicted"].get<int>() == detect_count);
    }
    SUBCASE("single-utterance corpus reports a null Pearson with a warning") {
        REQUIRE(run_cli("synth --spec " + spec + " --n 1 --seed 2 --min-syllables 4 "
                        "--max-syllables 6 --out " + dir.file("single"), dir)
                    .exit_code == 0);
        const RunResult r = run_cli("evaluate --manifest " + dir.file("single/manifest.json") +
                                    " --params " + params + " --report " + dir.file("rep1"),
                                    dir);
        REQUIRE(r.exit_code == 0);
        CHECK(r.err.find("Pearson") != std::string::npos);
        const nlohmann::json doc = nlohmann::json::parse(slurp(dir.file("rep1.json")));
        CHECK(doc["pearson_count_corr"].is_null());
    }
    SUBCASE("hopeless threshold still writes a report") {
        const std::string bad = dir.file("bad_params.json");
        {
            nlohmann::json doc;
            doc["weights"] = {0.001, 0.001, 0.001, 0.0, 0.0, 0.0, 0.0};
            doc["prominence_threshold"] = 10.0;
            std::ofstream out(bad);
            out << doc.dump(2) << "\n";
        }
        const RunResult r = run_cli("evaluate --manifest " + manifest + " --params " + bad +
                                    " --report " + dir.file("rep_bad"), dir);
        REQUIRE(r.exit_code == 0);
        const nlohmann::json doc = nlohmann::json::parse(slurp(dir.file("rep_bad.json")));
        CHECK(doc["recall"].get<double>() == 0.0);
        CHECK(doc["f_score"].get<double>() == 0.0);
    }
}

TEST_CASE("cli trace") {
    oracle::TempDir dir("cli_trace");
    const std::string params = dir.file("params.json");
    write_oracle_params(params, 5.0);

    SUBCASE("frame rows and nucleus flags match detection") {
        const std::string spec = dir.file("spec.json");
        write_clean_spec(spec);
        REQUIRE(run_cli("synth --spec " + spec + " --n 1 --seed 11 --min-syllables 5 "
                        "--max-syllables 5 --out " + dir.file("corpus"), dir)
                    .exit_code == 0);
        const std::string wav = dir.file("corpus/utt_0000.wav");
        const RunResult r =
            run_cli("trace --wav " + wav + " --params " + params + " --out " + dir.file("t.csv"),
                    dir);
        REQUIRE(r.exit_code == 0);
        const std::string csv = slurp(dir.file("t.csv"));
        // 5 syllables: 5*0.18 + 6*0.08 = 1.38 s -> floor((22080-320)/160)+1 = 137 frames
        CHECK(count_lines(csv) == 138);
        CHECK(csv.rfind("frame_time_s,e1,e2,e3,e4,e5,e6,e7,raw_envelope,smoothed_envelope,"
                        "speech_flag,is_detected_nucleus\n",
                        0) == 0);

        // nucleus flags agree with detect
        const RunResult det = run_cli("detect --wav " + wav + " --params " + params, dir);
        const int detect_count = nlohmann::json::parse(det.out)["count"].get<int>();
        int flagged = 0;
        std::istringstream lines(csv);
        std::string line;
        std::getline(lines, line); // header
        while (std::getline(lines, line))
            if (line.size() >= 2 && line.substr(line.size() - 2) == ",1") ++flagged;
        CHECK(flagged == detect_count);
    }
    SUBCASE("--config override changes the frame grid") {
        const std::string spec = dir.file("spec2.json");
        write_clean_spec(spec);
        REQUIRE(run_cli("synth --spec " + spec + " --n 1 --seed 11 --min-syllables 5 "
                        "--max-syllables 5 --out " + dir.file("corpus2"), dir)
                    .exit_code == 0);
        {
            std::ofstream cfg(dir.file("wide.json"));
            cfg << R"({"hop_s": 0.02})" << "\n";
        }
        const RunResult r = run_cli("trace --wav " + dir.file("corpus2/utt_0000.wav") +
                                    " --params " + params + " --config " + dir.file("wide.json") +
                                    " --out " + dir.file("w.csv"), dir);
        REQUIRE(r.exit_code == 0);
        // 22080 samples at hop 320: floor((22080-320)/320)+1 = 69 frames
        CHECK(count_lines(slurp(dir.file("w.csv"))) == 70);
    }
    SUBCASE("silence has no speech frames") {
        sylrate::AudioClip clip;
        clip.sample_rate = 16000;
        clip.samples.assign(16000, 0.0);
        sylrate::write_wav(dir.file("silence.wav"), clip);
        const RunResult r = run_cli("trace --wav " + dir.file("silence.wav") + " --params " +
                                    params + " --out " + dir.file("s.csv"),
                                    dir);
        REQUIRE(r.exit_code == 0);
        std::istringstream lines(slurp(dir.file("s.csv")));
        std::string line;
        std::getline(lines, line);
        int rows = 0;
        while (std::getline(lines, line)) {
            ++rows;
            // speech_flag is the second-to-last column
            CHECK(line.substr(line.size() - 4) == ",0,0");
        }
        CHECK(rows == 99);
    }
}

TEST_CASE("cli: unknown subcommand or missing arguments fail with exit 1") {
    oracle::TempDir dir("cli_bad");
    CHECK(run_cli("frobnicate", dir).exit_code == 1);
    CHECK(run_cli("detect", dir).exit_code == 1);
}
