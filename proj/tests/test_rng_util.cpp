#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <set>

#include "supermap/errors.hpp"
#include "supermap/rng.hpp"
#include "supermap/util.hpp"

using namespace supermap;

TEST_CASE("philox known-answer vectors") {
    // Reference vectors for Philox4x32-10 (Random123 distribution).
    const auto zero = Philox::block({0, 0, 0, 0}, {0, 0});
    CHECK(zero[0] == 0x6627e8d5u);
    CHECK(zero[1] == 0xe169c58du);
    CHECK(zero[2] == 0xbc57ac4cu);
    CHECK(zero[3] == 0x9b00dbd8u);

    const auto ones = Philox::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                    {0xffffffffu, 0xffffffffu});
    CHECK(ones[0] == 0x408f276du);
    CHECK(ones[1] == 0x41c83b0eu);
    CHECK(ones[2] == 0xa20bc7c6u);
    CHECK(ones[3] == 0x6d5451fdu);

    const auto pi = Philox::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                  {0xa4093822u, 0x299f31d0u});
    CHECK(pi[0] == 0xd16cfe09u);
    CHECK(pi[1] == 0x94fdccebu);
    CHECK(pi[2] == 0x5001e420u);
    CHECK(pi[3] == 0x24126ea1u);
}

TEST_CASE("philox streams are deterministic and distinct") {
    Philox a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    Philox c(42, 1);
    Philox d = Philox(42).derive(7);
    Philox e = Philox(42).derive(8);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 50; ++i) {
        seen.insert(c.next_u64());
        seen.insert(d.next_u64());
        seen.insert(e.next_u64());
    }
    CHECK(seen.size() == 150);
}

TEST_CASE("philox uniform ranges") {
    Philox rng(7);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    for (int i = 0; i < 10000; ++i) {
        const auto v = rng.uniform_int(3, 9);
        CHECK(v >= 3);
        CHECK(v <= 9);
    }
    // All values of a small range appear.
    std::set<std::uint64_t> values;
    for (int i = 0; i < 200; ++i) values.insert(rng.uniform_int(0, 4));
    CHECK(values.size() == 5);
}

TEST_CASE("base64 round trip and error paths") {
    Philox rng(3);
    for (int len = 0; len < 40; ++len) {
        std::vector<unsigned char> bytes(static_cast<std::size_t>(len));
        for (auto& b : bytes) b = static_cast<unsigned char>(rng.uniform_int(0, 255));
        const auto text = base64_encode(bytes);
        CHECK(base64_decode(text) == bytes);
    }
    CHECK_THROWS_AS(base64_decode("abc"), Error);
    CHECK_THROWS_AS(base64_decode("a==="), Error);
    CHECK_THROWS_AS(base64_decode("ab!d"), Error);
}

TEST_CASE("double serialization is bit-exact") {
    const std::vector<double> values{0.0, -0.0, 1.0 / 3.0, 1e300, -1e-300, 3.141592653589793};
    const auto bytes = doubles_to_bytes(values);
    const auto back = bytes_to_doubles(bytes);
    REQUIRE(back.size() == values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        CHECK(std::memcmp(&back[i], &values[i], sizeof(double)) == 0);
    }
}

TEST_CASE("digest is stable and content sensitive") {
    CHECK(digest_hex(std::string("abc")) == digest_hex(std::string("abc")));
    CHECK(digest_hex(std::string("abc")) != digest_hex(std::string("abd")));
    CHECK(digest_hex(std::string("")).size() == 16);
}
