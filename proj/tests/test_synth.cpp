#include <algorithm>
#include <cmath>

#include <doctest.h>

#include "oracles.hpp"
#include "sylrate/envelope.hpp"
#include "sylrate/errors.hpp"
#include "sylrate/peaks.hpp"
#include "sylrate/synth.hpp"

using namespace sylrate;

TEST_CASE("gen_utterance: construction arithmetic") {
    SUBCASE("zero syllables gives a near-silent clip with no segments") {
        SynthSpec spec;
        spec.n_syllables = 0;
        spec.fricative_prob = 0.0; // the lone gap must stay silent here
        spec.seed = 1;
        const SynthUtterance utt = gen_utterance(spec);
        CHECK(utt.record.vowel_segments.empty());
        CHECK(utt.record.syllable_count == 0);
        CHECK(utt.nucleus_times_s.empty());
        double peak = 0.0;
        for (const double s : utt.clip.samples) peak = std::max(peak, std::abs(s));
        CHECK(peak <= 2.0 * std::pow(10.0, spec.noise_db / 20.0));
    }
    SUBCASE("5 syllables at defaults last 1.38 s") {
        SynthSpec spec;
        spec.seed = 2;
        const SynthUtterance utt = gen_utterance(spec);
        CHECK(utt.clip.samples.size() == static_cast<std::size_t>(std::lround(1.38 * 16000)));
        CHECK(utt.record.vowel_segments.size() == 5);
        CHECK(utt.nucleus_times_s.size() == 5);
        CHECK(utt.record.syllable_count == 5);
        for (const double s : utt.clip.samples) {
            CHECK(s >= -1.0);
            CHECK(s <= 1.0);
        }
    }
    SUBCASE("same seed gives bit-identical samples") {
        SynthSpec spec;
        spec.seed = 3;
        const SynthUtterance a = gen_utterance(spec);
        const SynthUtterance b = gen_utterance(spec);
        CHECK(a.clip.samples == b.clip.samples);
        spec.seed = 4;
        const SynthUtterance c = gen_utterance(spec);
        CHECK(a.clip.samples != c.clip.samples);
    }
}

TEST_CASE("gen_utterance: nucleus times lie strictly inside their vowel segments") {
    std::mt19937_64 rng(61);
    for (int trial = 0; trial < 20; ++trial) {
        SynthSpec spec;
        spec.n_syllables = 1 + static_cast<int>(oracle::uniform01(rng) * 12);
        spec.seed = rng();
        const SynthUtterance utt = gen_utterance(spec);
        REQUIRE(utt.nucleus_times_s.size() == utt.record.vowel_segments.size());
        for (std::size_t i = 0; i < utt.nucleus_times_s.size(); ++i) {
            CHECK(utt.nucleus_times_s[i] > utt.record.vowel_segments[i].start_s);
            CHECK(utt.nucleus_times_s[i] < utt.record.vowel_segments[i].end_s);
        }
    }
}

TEST_CASE("gen_utterance: oracle weights recover every syllable on noise-free specs") {
    for (const int n : {1, 3, 5, 9}) {
        SynthSpec spec;
        spec.n_syllables = n;
        spec.fricative_prob = 0.0;
        spec.noise_db = -120.0;
        spec.seed = static_cast<std::uint64_t>(n) * 17 + 1;
        const SynthUtterance utt = gen_utterance(spec);

        WeightVector oracle_w;
        for (const int b : spec.formant_bands)
            oracle_w.w[static_cast<std::size_t>(b - 1)] = 1.0;
        const EnvelopeResult env = compute_envelope(utt.clip, oracle_w, PipelineConfig{});
        const auto candidates = find_local_maxima(env.envelope.values);
        double min_prom = 1e9;
        std::size_t speech_peaks = 0;
        for (const int idx : candidates) {
            if (!env.mask.flags[static_cast<std::size_t>(idx)]) continue;
            ++speech_peaks;
            min_prom = std::min(min_prom,
                                prominence(env.envelope.values, idx, candidates));
        }
        REQUIRE(speech_peaks >= static_cast<std::size_t>(n));
        const DetectionResult det = detect_syllables(env.envelope, env.mask, 0.5 * min_prom,
                                                     utt.clip.duration_s());
        CHECK(det.count == n);
    }
}

TEST_CASE("gen_corpus") {
    SynthSpec base;
    base.seed = 0;

    SUBCASE("counts stay inside the requested range") {
        const Corpus corpus = gen_corpus(base, 25, 4, 20, 9);
        REQUIRE(corpus.utterances.size() == 25);
        for (const auto& rec : corpus.utterances) {
            CHECK(rec.syllable_count >= 4);
            CHECK(rec.syllable_count <= 20);
            CHECK(rec.vowel_segments.size() == static_cast<std::size_t>(rec.syllable_count));
        }
    }
    SUBCASE("single utterance works") {
        CHECK(gen_corpus(base, 1, 4, 4, 1).utterances.size() == 1);
    }
    SUBCASE("same master seed reproduces the corpus") {
        const Corpus a = gen_corpus(base, 6, 4, 10, 42);
        const Corpus b = gen_corpus(base, 6, 4, 10, 42);
        REQUIRE(a.utterances.size() == b.utterances.size());
        for (std::size_t i = 0; i < a.utterances.size(); ++i) {
            CHECK(a.utterances[i].audio.samples == b.utterances[i].audio.samples);
            CHECK(a.utterances[i].syllable_count == b.utterances[i].syllable_count);
        }
        // per-utterance seeds differ
        CHECK(a.utterances[0].audio.samples != a.utterances[1].audio.samples);
    }
    SUBCASE("invalid arguments") {
        CHECK_THROWS_AS(gen_corpus(base, 0, 4, 20, 1), ValidationError);
        CHECK_THROWS_AS(gen_corpus(base, 5, 8, 4, 1), ValidationError);
    }
}

TEST_CASE("write_corpus round trip through load_corpus") {
    oracle::TempDir dir("synth_rt");
    SynthSpec base;
    base.seed = 0;
    const Corpus corpus = gen_corpus(base, 4, 3, 6, 77);
    const std::string manifest = write_corpus(corpus, dir.path().string());
    const Corpus loaded = load_corpus(manifest);
    REQUIRE(loaded.utterances.size() == corpus.utterances.size());
    for (std::size_t i = 0; i < corpus.utterances.size(); ++i) {
        const auto& a = corpus.utterances[i];
        const auto& b = loaded.utterances[i];
        CHECK(a.id == b.id);
        CHECK(a.syllable_count == b.syllable_count);
        REQUIRE(a.vowel_segments.size() == b.vowel_segments.size());
        for (std::size_t s = 0; s < a.vowel_segments.size(); ++s) {
            CHECK(b.vowel_segments[s].start_s ==
                  doctest::Approx(a.vowel_segments[s].start_s).epsilon(1e-12));
            CHECK(b.vowel_segments[s].end_s ==
                  doctest::Approx(a.vowel_segments[s].end_s).epsilon(1e-12));
        }
        REQUIRE(a.audio.samples.size() == b.audio.samples.size());
        for (std::size_t k = 0; k < a.audio.samples.size(); k += 97)
            CHECK(std::abs(a.audio.samples[k] - b.audio.samples[k]) <= 1.0 / 32768.0);
    }
}

TEST_CASE("synth spec JSON round trip") {
    oracle::TempDir dir("spec_rt");
    SynthSpec spec;
    spec.n_syllables = 7;
    spec.f0_hz = 220.0;
    spec.formant_bands = {2, 3, 4};
    spec.fricative_prob = 0.5;
    spec.seed = 123;
    const std::string path = dir.file("spec.json");
    save_synth_spec(path, spec);
    const SynthSpec back = load_synth_spec(path);
    CHECK(back.n_syllables == 7);
    CHECK(back.f0_hz == 220.0);
    CHECK(back.formant_bands == std::vector<int>{2, 3, 4});
    CHECK(back.fricative_prob == 0.5);
    CHECK(back.seed == 123);

    SynthSpec bad;
    bad.formant_bands = {9};
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}
