#include "sylrate/audio_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sylrate/errors.hpp"

namespace sylrate {

namespace {

std::uint16_t read_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t read_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0] | (p[1] << 8) | (p[2] << 16) |
                                      (static_cast<std::uint32_t>(p[3]) << 24));
}

void write_u16(std::ostream& os, std::uint16_t v) {
    const unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                                static_cast<unsigned char>(v >> 8)};
    os.write(reinterpret_cast<const char*>(b), 2);
}

void write_u32(std::ostream& os, std::uint32_t v) {
    const unsigned char b[4] = {
        static_cast<unsigned char>(v & 0xff), static_cast<unsigned char>((v >> 8) & 0xff),
        static_cast<unsigned char>((v >> 16) & 0xff), static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

} // namespace

AudioClip read_wav(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open wav file: " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    if (bytes.size() < 12) throw FormatError(path + ": truncated RIFF header");
    if (std::memcmp(bytes.data(), "RIFF", 4) != 0)
        throw FormatError(path + ": missing RIFF chunk id");
    if (std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
        throw FormatError(path + ": RIFF form type is not WAVE");

    bool have_fmt = false;
    std::uint16_t audio_format = 0, channels = 0, bits = 0;
    std::uint32_t sample_rate = 0;
    const unsigned char* data = nullptr;
    std::uint32_t data_len = 0;

    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const char* chunk_id = reinterpret_cast<const char*>(bytes.data() + pos);
        const std::uint32_t chunk_len = read_u32(bytes.data() + pos + 4);
        const std::size_t body = pos + 8;
        if (body + chunk_len > bytes.size())
            throw FormatError(path + ": chunk size exceeds file length");
        if (std::memcmp(chunk_id, "fmt ", 4) == 0) {
            if (chunk_len < 16) throw FormatError(path + ": fmt chunk too short");
            audio_format = read_u16(bytes.data() + body);
            channels = read_u16(bytes.data() + body + 2);
            sample_rate = read_u32(bytes.data() + body + 4);
            bits = read_u16(bytes.data() + body + 14);
            have_fmt = true;
        } else if (std::memcmp(chunk_id, "data", 4) == 0) {
            data = bytes.data() + body;
            data_len = chunk_len;
        }
        pos = body + chunk_len + (chunk_len & 1); // chunks are word-aligned
    }

    if (!have_fmt) throw FormatError(path + ": missing fmt chunk");
    if (data == nullptr) throw FormatError(path + ": missing data chunk");
    if (audio_format != 1)
        throw FormatError(path + ": audio_format " + std::to_string(audio_format) +
                          " unsupported (PCM required)");
    if (channels != 1)
        throw FormatError(path + ": channels " + std::to_string(channels) +
                          " unsupported (mono required)");
    if (bits != 16)
        throw FormatError(path + ": bits_per_sample " + std::to_string(bits) +
                          " unsupported (16 required)");
    if (sample_rate < 8000)
        throw FormatError(path + ": sample_rate " + std::to_string(sample_rate) +
                          " below the supported minimum of 8000 Hz");

    AudioClip clip;
    clip.sample_rate = static_cast<int>(sample_rate);
    const std::size_t n = data_len / 2;
    clip.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::int16_t s =
            static_cast<std::int16_t>(read_u16(data + 2 * i));
        clip.samples[i] = static_cast<double>(s) / 32768.0;
    }
    return clip;
}

void write_wav(const std::string& path, const AudioClip& clip) {
    if (clip.sample_rate <= 0)
        throw ValidationError("write_wav: sample_rate must be positive");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open wav file for writing: " + path);

    const std::uint32_t data_len = static_cast<std::uint32_t>(clip.samples.size() * 2);
    out.write("RIFF", 4);
    write_u32(out, 36 + data_len);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    write_u32(out, 16);
    write_u16(out, 1); // PCM
    write_u16(out, 1); // mono
    write_u32(out, static_cast<std::uint32_t>(clip.sample_rate));
    write_u32(out, static_cast<std::uint32_t>(clip.sample_rate) * 2);
    write_u16(out, 2);
    write_u16(out, 16);
    out.write("data", 4);
    write_u32(out, data_len);
    for (const double x : clip.samples) {
        const double clamped = std::clamp(x, -1.0, 1.0);
        const long q = std::lround(clamped * 32768.0);
        const std::int16_t s = static_cast<std::int16_t>(std::clamp(q, -32768L, 32767L));
        write_u16(out, static_cast<std::uint16_t>(s));
    }
    if (!out) throw IoError("failed writing wav file: " + path);
}

std::vector<PhoneSegment> parse_phonetic_annotation(const std::string& path, int sample_rate) {
    if (sample_rate <= 0)
        throw ValidationError("parse_phonetic_annotation: sample_rate must be positive");
    std::ifstream in(path);
    if (!in) throw IoError("cannot open annotation file: " + path);

    std::vector<PhoneSegment> segments;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ss(line);
        long long start = 0, end = 0;
        std::string label, extra;
        if (!(ss >> start)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue; // blank
            throw ParseError(path + ":" + std::to_string(line_no) + ": malformed line");
        }
        if (!(ss >> end >> label) || (ss >> extra))
            throw ParseError(path + ":" + std::to_string(line_no) + ": malformed line");
        if (start < 0 || end < 0)
            throw ParseError(path + ":" + std::to_string(line_no) + ": negative sample index");
        if (start >= end)
            throw ValidationError(path + ":" + std::to_string(line_no) +
                                  ": start sample is not before end sample");
        segments.push_back({static_cast<double>(start) / sample_rate,
                            static_cast<double>(end) / sample_rate, label});
    }
    return segments;
}

VowelSegment pad_vowel_segment(VowelSegment seg, double utterance_duration_s) {
    const double len = seg.end_s - seg.start_s;
    if (len < kMinVowelSegmentS) {
        const double mid = 0.5 * (seg.start_s + seg.end_s);
        seg.start_s = mid - 0.5 * kMinVowelSegmentS;
        seg.end_s = mid + 0.5 * kMinVowelSegmentS;
    }
    seg.start_s = std::max(seg.start_s, 0.0);
    seg.end_s = std::min(seg.end_s, utterance_duration_s);
    return seg;
}

std::vector<VowelSegment> derive_vowel_nuclei(const std::vector<PhoneSegment>& segments,
                                              const std::set<std::string>& vowel_labels,
                                              double utterance_duration_s) {
    std::vector<VowelSegment> nuclei;
    for (const auto& seg : segments) {
        if (!vowel_labels.count(seg.label)) continue;
        nuclei.push_back(
            pad_vowel_segment({seg.start_s, seg.end_s}, utterance_duration_s));
    }
    return nuclei;
}

Corpus load_corpus(const std::string& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw IoError("cannot open manifest: " + manifest_path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(manifest_path + ": " + e.what());
    }
    if (!doc.is_object() || !doc.contains("utterances") || !doc["utterances"].is_array())
        throw FormatError(manifest_path + ": expected object with an \"utterances\" array");

    std::set<std::string> vowel_labels;
    if (doc.contains("vowel_labels")) {
        for (const auto& v : doc["vowel_labels"]) vowel_labels.insert(v.get<std::string>());
    }

    const auto base = std::filesystem::path(manifest_path).parent_path();
    const auto resolve = [&](const std::string& p) {
        const std::filesystem::path fp(p);
        return fp.is_absolute() ? fp.string() : (base / fp).string();
    };

    Corpus corpus;
    for (const auto& entry : doc["utterances"]) {
        if (!entry.contains("id") || !entry.contains("wav"))
            throw FormatError(manifest_path + ": utterance entry missing \"id\" or \"wav\"");
        UtteranceRecord rec;
        rec.id = entry["id"].get<std::string>();
        try {
            rec.audio = read_wav(resolve(entry["wav"].get<std::string>()));
        } catch (const IoError& e) {
            throw IoError("utterance \"" + rec.id + "\": " + e.what());
        }
        const double duration = rec.audio.duration_s();
        if (entry.contains("nuclei")) {
            for (const auto& pair : entry["nuclei"]) {
                if (!pair.is_array() || pair.size() != 2)
                    throw FormatError(manifest_path + ": utterance \"" + rec.id +
                                      "\": nuclei entries must be [start_s, end_s]");
                rec.vowel_segments.push_back(pad_vowel_segment(
                    {pair[0].get<double>(), pair[1].get<double>()}, duration));
            }
        } else if (entry.contains("phn")) {
            std::vector<PhoneSegment> phones;
            try {
                phones = parse_phonetic_annotation(resolve(entry["phn"].get<std::string>()),
                                                   rec.audio.sample_rate);
            } catch (const IoError& e) {
                throw IoError("utterance \"" + rec.id + "\": " + e.what());
            }
            rec.vowel_segments = derive_vowel_nuclei(phones, vowel_labels, duration);
        } else {
            throw FormatError(manifest_path + ": utterance \"" + rec.id +
                              "\" has neither \"phn\" nor \"nuclei\"");
        }
        rec.syllable_count = static_cast<int>(rec.vowel_segments.size());
        corpus.utterances.push_back(std::move(rec));
    }
    if (corpus.utterances.empty())
        throw ValidationError(manifest_path + ": manifest lists zero utterances");
    return corpus;
}

} // namespace sylrate
