#include "swallowsense/audio_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "swallowsense/errors.hpp"

namespace swallowsense {

namespace {

// Bounds-checked little-endian cursor. Every read that would run past the
// end throws malformed_container, which is what makes the parser safe on
// truncated or mutated input.
class ByteReader {
public:
    explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

    std::size_t size() const { return bytes_.size(); }
    std::size_t pos() const { return pos_; }
    std::size_t remaining() const { return bytes_.size() - pos_; }

    void seek(std::size_t pos) {
        if (pos > bytes_.size()) throw Error(errc::malformed_container, "seek past end");
        pos_ = pos;
    }

    void skip(std::size_t n) { seek(pos_ + require(n)); }

    std::uint8_t u8() {
        require(1);
        return static_cast<std::uint8_t>(bytes_[pos_++]);
    }

    std::uint16_t u16() {
        require(2);
        auto v = static_cast<std::uint16_t>(static_cast<std::uint8_t>(bytes_[pos_]) |
                                            (static_cast<std::uint8_t>(bytes_[pos_ + 1]) << 8));
        pos_ += 2;
        return v;
    }

    std::uint32_t u32() {
        require(4);
        std::uint32_t v = 0;
        for (int i = 3; i >= 0; --i)
            v = (v << 8) | static_cast<std::uint8_t>(bytes_[pos_ + static_cast<std::size_t>(i)]);
        pos_ += 4;
        return v;
    }

    std::string fourcc() {
        require(4);
        std::string id(bytes_.substr(pos_, 4));
        pos_ += 4;
        return id;
    }

private:
    std::size_t require(std::size_t n) const {
        if (n > remaining()) throw Error(errc::malformed_container, "truncated chunk");
        return n;
    }

    std::string_view bytes_;
    std::size_t pos_ = 0;
};

struct FmtChunk {
    std::uint16_t format = 0;
    std::uint16_t channels = 0;
    std::uint32_t sample_rate = 0;
    std::uint16_t bits = 0;
};

double decode_sample(ByteReader& r, const FmtChunk& fmt) {
    if (fmt.format == 1) {  // integer PCM, scaled by the type's max magnitude
        switch (fmt.bits) {
            case 8:
                return (static_cast<int>(r.u8()) - 128) / 128.0;
            case 16:
                return static_cast<std::int16_t>(r.u16()) / 32768.0;
            case 24: {
                std::uint32_t v = r.u8() | (static_cast<std::uint32_t>(r.u8()) << 8) |
                                  (static_cast<std::uint32_t>(r.u8()) << 16);
                std::int32_t s = static_cast<std::int32_t>(v << 8) >> 8;  // sign-extend
                return s / 8388608.0;
            }
            case 32:
                return static_cast<std::int32_t>(r.u32()) / 2147483648.0;
        }
    } else {  // IEEE float
        std::uint32_t raw = r.u32();
        float f;
        std::memcpy(&f, &raw, sizeof(f));
        if (!std::isfinite(f)) return 0.0;  // hostile input; keep the invariant
        return std::clamp(static_cast<double>(f), -1.0, 1.0);
    }
    throw Error(errc::unsupported_encoding, "unreachable bit depth");
}

}  // namespace

AudioClip load_wav(std::string_view bytes, const std::string& source_id) {
    ByteReader r(bytes);
    if (r.fourcc() != "RIFF") throw Error(errc::malformed_container, "missing RIFF header");
    r.u32();  // riff size; files in the wild lie about it, so it is ignored
    if (r.fourcc() != "WAVE") throw Error(errc::malformed_container, "missing WAVE tag");

    FmtChunk fmt;
    bool fmt_found = false;
    std::size_t data_offset = 0, data_size = 0;
    bool data_found = false;

    while (r.remaining() > 0) {
        if (r.remaining() < 8) throw Error(errc::malformed_container, "dangling partial chunk");
        std::string id = r.fourcc();
        std::uint32_t size = r.u32();
        if (size > r.remaining()) throw Error(errc::malformed_container, "chunk overruns file");

        if (id == "fmt ") {
            if (size < 16) throw Error(errc::malformed_container, "fmt chunk too small");
            std::size_t chunk_end = r.pos() + size;
            fmt.format = r.u16();
            fmt.channels = r.u16();
            fmt.sample_rate = r.u32();
            r.u32();  // byte rate
            r.u16();  // block align
            fmt.bits = r.u16();
            fmt_found = true;
            r.seek(chunk_end);
        } else if (id == "data") {
            data_offset = r.pos();
            data_size = size;
            data_found = true;
            r.skip(size);
        } else {
            r.skip(size);  // LIST, cue, fact, ... — recorder metadata
        }
        // RIFF chunks are word-aligned; the final pad byte is sometimes
        // omitted by real writers, so it is only consumed when present.
        if ((size & 1u) && r.remaining() > 0) r.skip(1);
    }

    if (!fmt_found) throw Error(errc::malformed_container, "no fmt chunk");
    if (!data_found) throw Error(errc::malformed_container, "no data chunk");
    if (fmt.format != 1 && fmt.format != 3)
        throw Error(errc::unsupported_encoding,
                    "format code " + std::to_string(fmt.format) + " (only PCM=1 and float=3)");
    if (fmt.format == 1 && fmt.bits != 8 && fmt.bits != 16 && fmt.bits != 24 && fmt.bits != 32)
        throw Error(errc::unsupported_encoding, "PCM bit depth " + std::to_string(fmt.bits));
    if (fmt.format == 3 && fmt.bits != 32)
        throw Error(errc::unsupported_encoding, "float bit depth " + std::to_string(fmt.bits));
    if (fmt.channels == 0) throw Error(errc::malformed_container, "zero channels");
    if (fmt.sample_rate == 0 || fmt.sample_rate > 10'000'000)
        throw Error(errc::malformed_container, "bad sample rate");

    const std::size_t frame_size = static_cast<std::size_t>(fmt.channels) * (fmt.bits / 8);
    if (data_size % frame_size != 0)
        throw Error(errc::malformed_container, "data size not a whole number of frames");
    const std::size_t n_frames = data_size / frame_size;
    if (n_frames == 0) throw Error(errc::empty_audio, "zero frames in " + source_id);

    AudioClip clip;
    clip.sample_rate = static_cast<int>(fmt.sample_rate);
    clip.source_id = source_id;
    clip.samples.resize(n_frames);

    r.seek(data_offset);
    for (std::size_t i = 0; i < n_frames; ++i) {
        double acc = 0.0;
        for (unsigned c = 0; c < fmt.channels; ++c) acc += decode_sample(r, fmt);
        clip.samples[i] = acc / fmt.channels;  // mean downmix
    }
    return clip;
}

AudioClip load_wav_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(errc::io_failure, "cannot open " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return load_wav(bytes, path);
}

std::vector<std::uint8_t> write_wav(const AudioClip& clip) {
    const std::size_t n = clip.samples.size();
    const std::uint32_t data_size = static_cast<std::uint32_t>(n * 2);
    std::vector<std::uint8_t> out;
    out.reserve(44 + data_size);

    auto put_u16 = [&](std::uint16_t v) {
        out.push_back(static_cast<std::uint8_t>(v & 0xFF));
        out.push_back(static_cast<std::uint8_t>(v >> 8));
    };
    auto put_u32 = [&](std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
    };
    auto put_tag = [&](const char* tag) {
        out.insert(out.end(), tag, tag + 4);
    };

    const std::uint32_t sr = static_cast<std::uint32_t>(clip.sample_rate);
    put_tag("RIFF");
    put_u32(36 + data_size);
    put_tag("WAVE");
    put_tag("fmt ");
    put_u32(16);
    put_u16(1);   // PCM
    put_u16(1);   // mono
    put_u32(sr);
    put_u32(sr * 2);  // byte rate
    put_u16(2);   // block align
    put_u16(16);  // bits
    put_tag("data");
    put_u32(data_size);

    for (double s : clip.samples) {
        long v = std::lround(s * 32768.0);
        v = std::clamp(v, -32768L, 32767L);
        put_u16(static_cast<std::uint16_t>(static_cast<std::int16_t>(v)));
    }
    return out;
}

void write_wav_file(const AudioClip& clip, const std::string& path) {
    auto bytes = write_wav(clip);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(errc::io_failure, "cannot write " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(errc::io_failure, "short write to " + path);
}

}  // namespace swallowsense
