#include "levy_pri/json_io.hpp"

#include <gtest/gtest.h>

using namespace levy_pri;
using levy_pri::json_io::json;
namespace jio = levy_pri::json_io;

TEST(JsonIo, MeasureRoundTrip) {
    const std::vector<json> docs = {
        json::parse(R"({"variant":"power_law","alpha":1.3,"beta":0.4,"c_minus":2,"c_plus":0.5})"),
        json::parse(R"({"variant":"finite_activity","total_mass":3,"jump_law":{"name":"normal","mean":0,"sd":0.2}})"),
        json::parse(R"({"variant":"tabulated","grid":[0.1,0.5],"tail_plus":[5,1],"tail_minus":[0,0]})"),
        json::parse(R"({"variant":"one_sided_power","side":"minus","c":1,"index":0.7,"cutoff":"inf","cutoff_atom":false})"),
        json::parse(R"({"variant":"spectrally_negative","inner":{"variant":"power_law","alpha":1.5,"beta":0.5}})"),
        json::parse(R"({"variant":"sum","parts":[{"variant":"zero"},{"variant":"power_law","alpha":0.5,"beta":0.5}]})"),
    };
    for (const json& d : docs) {
        const json once = jio::write_measure(jio::read_measure(d));
        const json twice = jio::write_measure(jio::read_measure(once));
        EXPECT_EQ(once, twice) << d.dump();
    }
}

TEST(JsonIo, TripletRoundTripPreservesBehaviour) {
    const json d = json::parse(R"({"gamma":0.2,"sigma":0.0,"measure":{"variant":"power_law","alpha":1.5,"beta":0.5}})");
    const LevyTriplet t = jio::read_triplet(d);
    const LevyTriplet u = jio::read_triplet(jio::write_triplet(t));
    EXPECT_EQ(u.gamma, 0.2);
    EXPECT_EQ(tail(u.measure, Side::plus, 0.3), tail(t.measure, Side::plus, 0.3));
}

TEST(JsonIo, UnknownKeysRejected) {
    EXPECT_THROW(jio::read_measure(json::parse(R"({"variant":"power_law","alpha":1.5,"betta":0.5})")), std::invalid_argument);
    EXPECT_THROW(jio::read_measure(json::parse(R"({"variant":"levy_flight"})")), std::invalid_argument);
    const json q = json::parse(R"({"rel_tol":1e-6,"bogus":1})");
    EXPECT_THROW(jio::read_quad(&q), std::invalid_argument);
}

TEST(JsonIo, TypeErrorsRejected) {
    EXPECT_THROW(jio::read_triplet(json::parse(R"({"gamma":"x"})")), std::invalid_argument);
    EXPECT_THROW(jio::read_triplet(json::parse(R"({"sigma":-1})")), std::invalid_argument);
}

TEST(JsonIo, CanonicalHashIgnoresKeyOrderAndSpelling) {
    const json a = json::parse(R"({"gamma":0,"sigma":1,"measure":{"variant":"power_law","alpha":1.5,"beta":0.5}})");
    const json b = json::parse(R"({"measure":{"beta":5e-1,"alpha":1.50,"variant":"power_law"},"sigma":1.0,"gamma":0.0})");
    const auto h = [](const json& j) { return jio::fnv1a64(jio::canonical_dump(jio::write_triplet(jio::read_triplet(j)))); };
    EXPECT_EQ(h(a), h(b));
    const json c = json::parse(R"({"gamma":0,"sigma":1,"measure":{"variant":"power_law","alpha":1.5,"beta":0.6}})");
    EXPECT_NE(h(a), h(c));
}

TEST(JsonIo, Fnv1aKnownValues) {
    EXPECT_EQ(jio::fnv1a64(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(jio::fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
    EXPECT_EQ(jio::hex64(0xabcULL), "0000000000000abc");
}
