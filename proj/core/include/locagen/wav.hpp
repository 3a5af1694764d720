#pragma once

#include <string>
#include <vector>

#include "locagen/dsp.hpp"

namespace locagen::io {

enum class WavFormat { pcm16, float32 };

struct AudioBuffer {
    std::vector<std::vector<double>> channels;  // equal lengths
    double sample_rate = 0.0;
    WavFormat source_format = WavFormat::pcm16;

    std::size_t frames() const { return channels.empty() ? 0 : channels.front().size(); }
    dsp::Waveform channel(std::size_t i) const { return {channels.at(i), sample_rate}; }
};

// RIFF WAVE reader; accepts PCM 16-bit and IEEE float 32-bit.
AudioBuffer read_wav(const std::string& path);

void write_wav(const std::string& path, const AudioBuffer& buffer,
               WavFormat format = WavFormat::float32);

}  // namespace locagen::io
