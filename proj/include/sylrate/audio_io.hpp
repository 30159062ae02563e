#pragma once

#include <set>
#include <string>
#include <vector>

namespace sylrate {

// Minimum length of a ground-truth vowel segment after padding, seconds.
inline constexpr double kMinVowelSegmentS = 0.050;

// Normalized mono audio. Samples are in [-1, 1].
struct AudioClip {
    std::vector<double> samples;
    int sample_rate = 0;

    double duration_s() const {
        return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
    }
};

// One phone-level annotation interval, in seconds.
struct PhoneSegment {
    double start_s = 0.0;
    double end_s = 0.0;
    std::string label;
};

// Ground-truth syllable-nucleus segment (padded vowel interval), in seconds.
struct VowelSegment {
    double start_s = 0.0;
    double end_s = 0.0;
};

struct UtteranceRecord {
    std::string id;
    AudioClip audio;
    std::vector<VowelSegment> vowel_segments;
    int syllable_count = 0;
};

struct Corpus {
    std::vector<UtteranceRecord> utterances;
};

// Reads a RIFF/WAVE PCM 16-bit mono file. Integer samples are divided by
// 32768 so every amplitude lies in [-1, 1]. Throws FormatError naming the
// offending header field for anything that is not PCM16 mono.
AudioClip read_wav(const std::string& path);

// Writes PCM 16-bit mono. Samples are clamped to [-1, 1] and quantized by
// rounding to the nearest integer step (read_wav(write_wav(x)) reproduces x
// within 1/32768).
void write_wav(const std::string& path, const AudioClip& clip);

// Parses TIMIT-style annotation lines `start_sample end_sample label`.
// Times are converted to seconds using sample_rate. Throws ParseError with
// the line number on malformed lines, ValidationError when start >= end.
std::vector<PhoneSegment> parse_phonetic_annotation(const std::string& path, int sample_rate);

// Pads a segment shorter than kMinVowelSegmentS symmetrically about its
// midpoint to exactly that length, then clamps to [0, utterance_duration_s].
VowelSegment pad_vowel_segment(VowelSegment seg, double utterance_duration_s);

// Keeps segments whose label is in vowel_labels, pads each with
// pad_vowel_segment, preserves input order.
std::vector<VowelSegment> derive_vowel_nuclei(const std::vector<PhoneSegment>& segments,
                                              const std::set<std::string>& vowel_labels,
                                              double utterance_duration_s);

// Loads a JSON manifest: {"vowel_labels": [...], "utterances": [{"id", "wav",
// "phn"? , "nuclei"? : [[start_s, end_s], ...]}, ...]}. Each entry must have
// either "phn" or "nuclei". Explicit nuclei segments get the same padding as
// derived ones. Throws IoError naming the utterance id on missing files and
// ValidationError on an empty utterance list.
Corpus load_corpus(const std::string& manifest_path);

} // namespace sylrate
