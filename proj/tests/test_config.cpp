#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "relext/config.hpp"

using namespace relext;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& text) {
    const auto path = std::filesystem::temp_directory_path() / ("relext_config_" + name);
    std::ofstream(path) << text;
    return path;
}

}  // namespace

TEST(RunConfig, Defaults) {
    const RunConfig c;
    EXPECT_EQ(c.pipeline.model.variant, Variant::mtl_tag);
    EXPECT_EQ(c.pipeline.model.window_sizes, (std::vector<int>{4, 5, 6, 7, 8, 9, 10}));
    EXPECT_EQ(c.pipeline.model.hidden_units, 128);
    EXPECT_EQ(c.pipeline.model.learning_rate, 0.001);
    EXPECT_EQ(c.pipeline.model.rms_rho, 0.9);
    EXPECT_EQ(c.pipeline.model.ranking.m_plus, 2.5);
    EXPECT_NO_THROW(validate(c));
}

TEST(RunConfig, UnknownKeyAndBadValue) {
    RunConfig c;
    EXPECT_THROW(set_key(c, "learning_rat", "0.1"), ConfigError);
    EXPECT_THROW(set_key(c, "epochs", "ten"), ConfigError);
    EXPECT_THROW(set_key(c, "variant", "lstm"), ConfigError);
    EXPECT_THROW(set_assignment(c, "no equals sign"), ConfigError);
    set_assignment(c, " epochs = 7 ");
    EXPECT_EQ(c.pipeline.model.epochs, 7);
    c.k = 1;
    EXPECT_THROW(validate(c), ConfigError);
}

TEST(RunConfig, Presets) {
    RunConfig c;
    apply_preset(c, "chinese");
    EXPECT_EQ(c.pipeline.model.ranking.m_plus, 4.5);
    EXPECT_EQ(c.pipeline.model.ranking.m_minus, -0.5);
    EXPECT_EQ(c.pipeline.model.ranking.theta, 1.0);
    apply_preset(c, "english");
    EXPECT_EQ(c.pipeline.model.ranking.m_plus, 2.5);
    EXPECT_EQ(c.pipeline.model.ranking.theta, 0.0);
    apply_preset(c, "tiny");
    EXPECT_EQ(c.pipeline.model.d_word, 32);
    EXPECT_EQ(c.preset, "chinese,english,tiny");
    EXPECT_THROW(apply_preset(c, "huge"), ConfigError);
}

TEST(RunConfig, FileWithCommentsAndLineNumbers) {
    const auto good = write_temp("good.txt",
                                 "# comment line\n"
                                 "\n"
                                 "variant = baseline   # trailing comment\n"
                                 "windows = 2-4\n"
                                 "sweep_ratios = 1,5\n"
                                 "type_filter = false\n");
    RunConfig c;
    apply_config_file(c, good);
    EXPECT_EQ(c.pipeline.model.variant, Variant::baseline);
    EXPECT_EQ(c.pipeline.model.window_sizes, (std::vector<int>{2, 3, 4}));
    EXPECT_EQ(c.sweep_ratios, (std::vector<double>{1, 5}));
    EXPECT_FALSE(c.pipeline.type_filter);

    const auto bad = write_temp("bad.txt", "epochs = 3\n\nbogus = 1\n");
    try {
        apply_config_file(c, bad);
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
    }
    EXPECT_THROW(apply_config_file(c, "/nonexistent/relext.conf"), ConfigError);
    std::filesystem::remove(good);
    std::filesystem::remove(bad);
}

TEST(RunConfig, KeyValueRoundTrip) {
    RunConfig c;
    apply_preset(c, "tiny");
    set_key(c, "mode", "undirected");
    set_key(c, "ratio", "5");
    set_key(c, "sweep_variants", "baseline,mtl");
    set_key(c, "synth_typed_names", "false");
    set_key(c, "seed", "12345678901");
    RunConfig back;
    for (const auto& [k, v] : to_key_values(c)) set_key(back, k, v);
    EXPECT_EQ(to_key_values(back), to_key_values(c));
    EXPECT_EQ(back.seed(), 12345678901u);
    EXPECT_EQ(back.pipeline.mode, ExtractionMode::undirected);
    EXPECT_EQ(back.sweep_variants, (std::vector<Variant>{Variant::baseline, Variant::mtl}));
}

TEST(RunConfig, LaterAssignmentsOverride) {
    const auto file = write_temp("override.txt", "epochs = 3\nhidden_units = 20\n");
    RunConfig c;
    apply_config_file(c, file);
    set_assignment(c, "epochs=9");
    EXPECT_EQ(c.pipeline.model.epochs, 9);
    EXPECT_EQ(c.pipeline.model.hidden_units, 20);
    std::filesystem::remove(file);
}

TEST(RunConfig, SyntheticSpec) {
    RunConfig c;
    set_key(c, "synth_sentences", "12");
    set_key(c, "synth_classes", "3");
    set_key(c, "synth_decoy_prob", "0.5");
    const auto spec = c.synthetic_spec();
    EXPECT_EQ(spec.sentence_count, 12);
    EXPECT_EQ(spec.patterns.size(), 3u);
    EXPECT_EQ(spec.decoy_probability, 0.5);
}
