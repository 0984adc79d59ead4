#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <filesystem>
#include <string>

#include "advkit/checkpoint.hpp"
#include "advkit/mlp.hpp"
#include "advkit/rng.hpp"
#include "support/test_support.hpp"

using namespace advkit;

namespace {

MlpClassifier make_model(std::uint64_t seed) {
    return MlpClassifier::random_init({4, 5, 3}, seed);
}

CheckpointMeta make_meta() {
    CheckpointMeta m;
    m.seed = 0xdeadbeefcafe1234ULL;
    m.epochs = 17;
    m.train_accuracy = 0.1 + 0.2; // deliberately not exactly 0.3
    m.test_accuracy = 0.9875;
    return m;
}

} // namespace

TEST_CASE("checkpoint round trip preserves parameters bitwise") {
    auto path = testsupport::scratch_dir() / "roundtrip.ckpt";
    MlpClassifier model = make_model(7);
    CheckpointMeta meta = make_meta();

    save_checkpoint(model, meta, path.string());
    LoadedCheckpoint loaded = load_checkpoint(path.string());

    REQUIRE(loaded.model.layers().size() == model.layers().size());
    REQUIRE(testsupport::bitwise_equal(loaded.model.flat_params(), model.flat_params()));
    REQUIRE(loaded.meta.seed == meta.seed);
    REQUIRE(loaded.meta.epochs == meta.epochs);
    // f64 payloads are raw bit copies, so even non-representable sums survive.
    REQUIRE(loaded.meta.train_accuracy == meta.train_accuracy);
    REQUIRE(loaded.meta.test_accuracy == meta.test_accuracy);

    Tensor x({4});
    Rng rng(99);
    for (auto& v : x.data) v = rng.next_unit();
    REQUIRE(testsupport::bitwise_equal(loaded.model.predict(x).data, model.predict(x).data));
}

TEST_CASE("checkpoint save leaves no temp file behind") {
    auto path = testsupport::scratch_dir() / "notmp.ckpt";
    save_checkpoint(make_model(1), make_meta(), path.string());
    REQUIRE(std::filesystem::exists(path));
    REQUIRE_FALSE(std::filesystem::exists(path.string() + ".tmp"));
}

TEST_CASE("checkpoint load of a missing file is an io error") {
    auto path = testsupport::scratch_dir() / "does-not-exist.ckpt";
    REQUIRE_THROWS_AS(load_checkpoint(path.string()), io_error);
}

TEST_CASE("checkpoint rejects corrupted contents") {
    auto base = testsupport::scratch_dir() / "donor.ckpt";
    save_checkpoint(make_model(3), make_meta(), base.string());
    std::string bytes = testsupport::read_file(base);

    SECTION("bad magic") {
        std::string bad = bytes;
        bad[0] = 'X';
        auto p = testsupport::scratch_dir() / "badmagic.ckpt";
        testsupport::write_file(p, bad);
        REQUIRE_THROWS_WITH(load_checkpoint(p.string()),
                            Catch::Matchers::ContainsSubstring("bad magic"));
    }

    SECTION("unsupported version") {
        std::string bad = bytes;
        // Version is the little-endian u32 right after the 8-byte magic.
        bad[8] = static_cast<char>(999 & 0xff);
        bad[9] = static_cast<char>((999 >> 8) & 0xff);
        bad[10] = 0;
        bad[11] = 0;
        auto p = testsupport::scratch_dir() / "badversion.ckpt";
        testsupport::write_file(p, bad);
        REQUIRE_THROWS_WITH(load_checkpoint(p.string()),
                            Catch::Matchers::ContainsSubstring("unsupported version 999"));
    }

    SECTION("zero layer count") {
        std::string bad = bytes;
        bad[12] = bad[13] = bad[14] = bad[15] = 0;
        auto p = testsupport::scratch_dir() / "zerolayers.ckpt";
        testsupport::write_file(p, bad);
        REQUIRE_THROWS_AS(load_checkpoint(p.string()), checkpoint_error);
    }

    SECTION("truncated") {
        for (std::size_t cut : {bytes.size() / 2, bytes.size() - 1, std::size_t{4}}) {
            auto p = testsupport::scratch_dir() / ("trunc" + std::to_string(cut) + ".ckpt");
            testsupport::write_file(p, bytes.substr(0, cut));
            REQUIRE_THROWS_AS(load_checkpoint(p.string()), checkpoint_error);
        }
    }

    SECTION("trailing bytes") {
        auto p = testsupport::scratch_dir() / "trailing.ckpt";
        testsupport::write_file(p, bytes + '\0');
        REQUIRE_THROWS_WITH(load_checkpoint(p.string()),
                            Catch::Matchers::ContainsSubstring("trailing"));
    }
}
