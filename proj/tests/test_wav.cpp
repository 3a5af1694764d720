#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "locagen/rng.hpp"
#include "locagen/wav.hpp"

using namespace locagen;
using namespace locagen::io;

TEST_SUITE_BEGIN("wav");

TEST_CASE("float32 round-trip is exact") {
    AudioBuffer buf;
    buf.sample_rate = 10000.0;
    buf.channels.resize(3);
    Rng rng(2);
    for (auto& ch : buf.channels) {
        ch.resize(500);
        for (auto& s : ch) s = static_cast<float>(rng.normal(0.0, 0.25));
    }

    const std::string path = "test_wav_f32.wav";
    write_wav(path, buf, WavFormat::float32);
    const auto loaded = read_wav(path);
    CHECK(loaded.sample_rate == 10000.0);
    REQUIRE(loaded.channels.size() == 3);
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < 500; ++i)
            CHECK(loaded.channels[c][i] == buf.channels[c][i]);
    std::remove(path.c_str());
}

TEST_CASE("pcm16 round-trip within quantization step") {
    AudioBuffer buf;
    buf.sample_rate = 48000.0;
    buf.channels.resize(2);
    Rng rng(3);
    for (auto& ch : buf.channels) {
        ch.resize(256);
        for (auto& s : ch) s = rng.uniform(-0.9, 0.9);
    }

    const std::string path = "test_wav_pcm16.wav";
    write_wav(path, buf, WavFormat::pcm16);
    const auto loaded = read_wav(path);
    REQUIRE(loaded.channels.size() == 2);
    for (int c = 0; c < 2; ++c)
        for (std::size_t i = 0; i < 256; ++i)
            CHECK(std::fabs(loaded.channels[c][i] - buf.channels[c][i]) <= 1.0 / 32768.0);
    std::remove(path.c_str());
}

TEST_CASE("channel interleave order is preserved") {
    AudioBuffer buf;
    buf.sample_rate = 8000.0;
    buf.channels = {{0.1, 0.1}, {0.2, 0.2}, {0.3, 0.3}};
    const std::string path = "test_wav_order.wav";
    write_wav(path, buf, WavFormat::float32);
    const auto loaded = read_wav(path);
    CHECK(loaded.channels[0][0] == doctest::Approx(0.1));
    CHECK(loaded.channels[1][0] == doctest::Approx(0.2));
    CHECK(loaded.channels[2][0] == doctest::Approx(0.3));
    std::remove(path.c_str());
}

TEST_CASE("garbage and truncated files are rejected") {
    const std::string path = "test_wav_bad.wav";
    {
        std::ofstream out(path, std::ios::binary);
        out << "not a wav file at all";
    }
    CHECK_THROWS_AS(read_wav(path), std::runtime_error);
    std::remove(path.c_str());
    CHECK_THROWS_AS(read_wav("does_not_exist.wav"), std::runtime_error);
}

TEST_SUITE_END();
