#include "locagen/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace locagen::io {

namespace {

// on-disk little-endian readers/writers (host is assumed little-endian,
// which the build targets)
template <typename T>
T read_le(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

template <typename T>
void write_le(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

}  // namespace

AudioBuffer read_wav(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_wav: cannot open " + path);

    char tag[4];
    in.read(tag, 4);
    if (!in || std::memcmp(tag, "RIFF", 4) != 0)
        throw std::runtime_error("read_wav: " + path + " is not a RIFF file");
    read_le<std::uint32_t>(in);  // riff size
    in.read(tag, 4);
    if (!in || std::memcmp(tag, "WAVE", 4) != 0)
        throw std::runtime_error("read_wav: " + path + " is not a WAVE file");

    std::uint16_t format_code = 0, n_channels = 0, bits = 0;
    std::uint32_t sample_rate = 0;
    bool have_fmt = false;
    std::vector<char> payload;

    while (in) {
        in.read(tag, 4);
        if (!in) break;
        const std::uint32_t size = read_le<std::uint32_t>(in);
        if (!in) throw std::runtime_error("read_wav: truncated chunk header in " + path);
        if (std::memcmp(tag, "fmt ", 4) == 0) {
            format_code = read_le<std::uint16_t>(in);
            n_channels = read_le<std::uint16_t>(in);
            sample_rate = read_le<std::uint32_t>(in);
            read_le<std::uint32_t>(in);  // byte rate
            read_le<std::uint16_t>(in);  // block align
            bits = read_le<std::uint16_t>(in);
            if (size > 16) in.ignore(size - 16);
            have_fmt = true;
        } else if (std::memcmp(tag, "data", 4) == 0) {
            payload.resize(size);
            in.read(payload.data(), size);
            if (!in) throw std::runtime_error("read_wav: truncated data chunk in " + path);
        } else {
            in.ignore(size + (size & 1));
        }
        if ((size & 1) && std::memcmp(tag, "data", 4) == 0) in.ignore(1);
    }

    if (!have_fmt) throw std::runtime_error("read_wav: missing fmt chunk in " + path);
    if (payload.empty()) throw std::runtime_error("read_wav: missing data chunk in " + path);
    if (n_channels == 0) throw std::runtime_error("read_wav: zero channels in " + path);

    AudioBuffer buf;
    buf.sample_rate = sample_rate;

    if (format_code == 1 && bits == 16) {
        buf.source_format = WavFormat::pcm16;
        const std::size_t n_frames = payload.size() / (2 * n_channels);
        buf.channels.assign(n_channels, std::vector<double>(n_frames));
        const auto* s = reinterpret_cast<const std::int16_t*>(payload.data());
        for (std::size_t f = 0; f < n_frames; ++f)
            for (std::uint16_t c = 0; c < n_channels; ++c)
                buf.channels[c][f] = static_cast<double>(s[f * n_channels + c]) / 32768.0;
    } else if (format_code == 3 && bits == 32) {
        buf.source_format = WavFormat::float32;
        const std::size_t n_frames = payload.size() / (4 * n_channels);
        buf.channels.assign(n_channels, std::vector<double>(n_frames));
        const auto* s = reinterpret_cast<const float*>(payload.data());
        for (std::size_t f = 0; f < n_frames; ++f)
            for (std::uint16_t c = 0; c < n_channels; ++c)
                buf.channels[c][f] = static_cast<double>(s[f * n_channels + c]);
    } else {
        throw std::runtime_error("read_wav: unsupported format in " + path +
                                 " (want PCM 16-bit or IEEE float 32-bit)");
    }
    return buf;
}

void write_wav(const std::string& path, const AudioBuffer& buffer, WavFormat format) {
    if (buffer.channels.empty()) throw std::invalid_argument("write_wav: no channels");
    const std::size_t n_frames = buffer.frames();
    for (const auto& ch : buffer.channels)
        if (ch.size() != n_frames)
            throw std::invalid_argument("write_wav: channel lengths differ");

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_wav: cannot open " + path + " for writing");

    const std::uint16_t n_channels = static_cast<std::uint16_t>(buffer.channels.size());
    const std::uint16_t bits = format == WavFormat::pcm16 ? 16 : 32;
    const std::uint16_t block_align = static_cast<std::uint16_t>(n_channels * bits / 8);
    const std::uint32_t data_size = static_cast<std::uint32_t>(n_frames * block_align);
    const std::uint32_t rate = static_cast<std::uint32_t>(std::llround(buffer.sample_rate));

    out.write("RIFF", 4);
    write_le<std::uint32_t>(out, 36 + data_size);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    write_le<std::uint32_t>(out, 16);
    write_le<std::uint16_t>(out, format == WavFormat::pcm16 ? 1 : 3);
    write_le<std::uint16_t>(out, n_channels);
    write_le<std::uint32_t>(out, rate);
    write_le<std::uint32_t>(out, rate * block_align);
    write_le<std::uint16_t>(out, block_align);
    write_le<std::uint16_t>(out, bits);
    out.write("data", 4);
    write_le<std::uint32_t>(out, data_size);

    for (std::size_t f = 0; f < n_frames; ++f) {
        for (std::uint16_t c = 0; c < n_channels; ++c) {
            const double v = buffer.channels[c][f];
            if (format == WavFormat::pcm16) {
                const double clamped = std::clamp(v, -1.0, 32767.0 / 32768.0);
                write_le<std::int16_t>(out,
                                       static_cast<std::int16_t>(std::lrint(clamped * 32768.0)));
            } else {
                write_le<float>(out, static_cast<float>(v));
            }
        }
    }
    if (!out) throw std::runtime_error("write_wav: write failed for " + path);
}

}  // namespace locagen::io
