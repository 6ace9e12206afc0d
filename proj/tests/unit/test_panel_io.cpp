#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "copmarkov/panel_io.hpp"
#include "generators.hpp"

using namespace copmarkov;

namespace {

std::string fixture(const std::string& name) { return std::string(COPMARKOV_FIXTURE_DIR) + "/" + name; }

CsvError load_error(const std::string& name, const LoadOptions& options = {}) {
    try {
        load_csv(fixture(name), options);
    } catch (const CsvError& e) {
        return e;
    }
    ADD_FAILURE() << name << " loaded without error";
    return CsvError(CsvErrorKind::MissingFile, "none");
}

OrdinalPanel parse(const std::string& text, const LoadOptions& options = {}) {
    std::istringstream in(text);
    return read_csv(in, options);
}

}  // namespace

TEST(ReadCsv, ValidFileSortsWavesAndKeepsCoupleOrder) {
    const OrdinalPanel p = load_csv(fixture("valid.csv"));
    ASSERT_EQ(p.couple_count(), 2u);
    EXPECT_EQ(p.couple_id(0), "A");
    EXPECT_EQ(p.couple_id(1), "B");
    EXPECT_EQ(p.first_wave(0), 1);
    EXPECT_EQ(p.first_wave(1), 4);
    EXPECT_EQ(p.waves(0), 3u);
    EXPECT_EQ(p.waves(1), 2u);
    EXPECT_EQ(p.categories(Gender::Male), 3);
    EXPECT_EQ(p.categories(Gender::Female), 4);
    const auto ym = p.responses(Gender::Male, 0);
    EXPECT_EQ((std::vector<int>(ym.begin(), ym.end())), (std::vector<int>{2, 3, 1}));
    EXPECT_EQ(p.covariates(Gender::Male)(2, 0), 0.25);
    EXPECT_EQ(p.covariates(Gender::Female)(0, 0), -1.25);
    EXPECT_EQ(p.covariate_names(Gender::Female), std::vector<std::string>{"x_f_1"});
    const auto dist = wave_count_distribution(p);
    EXPECT_EQ(dist.at(2), 1u);
    EXPECT_EQ(dist.at(3), 1u);
}

TEST(ReadCsv, DeclaredCategoriesOverrideInference) {
    LoadOptions o;
    o.categories_male = 7;
    o.categories_female = 5;
    const OrdinalPanel p = load_csv(fixture("valid.csv"), o);
    EXPECT_EQ(p.categories(Gender::Male), 7);
    EXPECT_EQ(p.categories(Gender::Female), 5);
}

TEST(ReadCsv, SingleWaveFile) {
    const OrdinalPanel p = load_csv(fixture("single_wave.csv"));
    EXPECT_EQ(p.couple_count(), 3u);
    EXPECT_EQ(p.observation_count(), 3u);
    EXPECT_EQ(wave_count_distribution(p).at(1), 3u);
    EXPECT_EQ(p.covariate_dim(), 0);
}

TEST(ReadCsv, ErrorKinds) {
    EXPECT_EQ(load_error("no_such_file.csv").kind(), CsvErrorKind::MissingFile);
    EXPECT_EQ(load_error("empty.csv").kind(), CsvErrorKind::EmptyFile);
    EXPECT_EQ(load_error("header_only.csv").kind(), CsvErrorKind::EmptyFile);
    const CsvError header = load_error("bad_header.csv");
    EXPECT_EQ(header.kind(), CsvErrorKind::Header);
    EXPECT_EQ(header.column(), 6u);
    const CsvError row = load_error("malformed_row.csv");
    EXPECT_EQ(row.kind(), CsvErrorKind::MalformedRow);
    EXPECT_EQ(row.line(), 3u);
    EXPECT_EQ(row.column(), 5u);
    EXPECT_EQ(row.couple(), "A");
    const CsvError unbalanced = load_error("unbalanced_couple.csv");
    EXPECT_EQ(unbalanced.kind(), CsvErrorKind::UnbalancedCouple);
    EXPECT_EQ(unbalanced.line(), 3u);
    const CsvError gap = load_error("wave_gap.csv");
    EXPECT_EQ(gap.kind(), CsvErrorKind::WaveSequence);
    EXPECT_EQ(gap.couple(), "A");
    const CsvError constant = load_error("constant_covariate.csv");
    EXPECT_EQ(constant.kind(), CsvErrorKind::ConstantCovariate);
    EXPECT_NE(std::string(constant.what()).find("x_m_1"), std::string::npos);
}

TEST(ReadCsv, CategoryOutOfRangeNamesLineAndColumn) {
    LoadOptions o;
    o.categories_male = 11;
    const CsvError e = load_error("category_out_of_range.csv", o);
    EXPECT_EQ(e.kind(), CsvErrorKind::CategoryOutOfRange);
    EXPECT_EQ(e.line(), 3u);
    EXPECT_EQ(e.column(), 3u);
    const std::string what = e.what();
    EXPECT_NE(what.find("line 3"), std::string::npos) << what;
    EXPECT_NE(what.find("column 3"), std::string::npos) << what;
    EXPECT_NE(what.find("12"), std::string::npos) << what;
    // Without a declared count the category is accepted and K inferred.
    EXPECT_EQ(load_csv(fixture("category_out_of_range.csv")).categories(Gender::Male), 12);
}

TEST(ReadCsv, InlineEdgeCases) {
    EXPECT_THROW(parse("couple_id,wave,y_m,y_f\nA,1,0,1\n"), CsvError);
    EXPECT_THROW(parse("couple_id,wave,y_m,y_f\nA,1,1,1\nA,1,2,2\n"), CsvError);
    EXPECT_THROW(parse("couple_id,wave,y_m,y_f\nA,1,1\n"), CsvError);
    EXPECT_THROW(parse("couple_id,wave,y_m,y_f\n,1,1,1\n"), CsvError);
    EXPECT_THROW(parse("couple_id,wave,y_m,y_f,x_m_1,x_f_1\nA,1,1,1,inf,1\nB,1,1,1,0,2\n"), CsvError);
    // Byte-order mark, CRLF, blank lines and a leading plus sign.
    const OrdinalPanel p = parse("\xEF\xBB\xBF" "couple_id,wave,y_m,y_f\r\nA,1,+1,2\r\n\r\nA,2,2,2\r\n");
    EXPECT_EQ(p.waves(0), 2u);
    EXPECT_EQ(p.responses(Gender::Male)[0], 1);
}

TEST(WriteCsv, RoundTripIsExact) {
    gen::Rng rng(5);
    const OrdinalPanel p = gen::panel(rng, 40, 1, 6, 5, 3, 2);
    std::ostringstream out;
    write_csv(p, out);
    std::istringstream in(out.str());
    LoadOptions o;
    o.categories_male = 5;
    o.categories_female = 3;
    const OrdinalPanel q = read_csv(in, o);
    ASSERT_EQ(q.couple_count(), p.couple_count());
    for (std::size_t c = 0; c < p.couple_count(); ++c) {
        ASSERT_EQ(q.couple_id(c), p.couple_id(c));
        ASSERT_EQ(q.first_wave(c), p.first_wave(c));
        ASSERT_EQ(q.waves(c), p.waves(c));
    }
    for (Gender g : {Gender::Male, Gender::Female}) {
        const auto a = p.responses(g);
        const auto b = q.responses(g);
        ASSERT_TRUE(std::equal(a.begin(), a.end(), b.begin(), b.end()));
        ASSERT_EQ(p.covariates(g), q.covariates(g));
    }
}

TEST(WriteCsv, FileHelpersReportPaths) {
    const auto dir = std::filesystem::temp_directory_path() / "copmarkov_io_test";
    std::filesystem::create_directories(dir);
    const std::string path = (dir / "panel.csv").string();
    gen::Rng rng(6);
    const OrdinalPanel p = gen::panel(rng, 5, 2, 3, 3, 3, 1);
    write_csv(p, path);
    EXPECT_EQ(load_csv(path, {3, 3}).observation_count(), p.observation_count());
    try {
        read_text_file((dir / "absent.txt").string());
        FAIL();
    } catch (const InputError& e) {
        EXPECT_NE(std::string(e.what()).find("absent.txt"), std::string::npos);
    }
    EXPECT_THROW(write_text_file((dir / "no" / "dir" / "x").string(), "x"), InputError);
    std::filesystem::remove_all(dir);
}

TEST(ParseIntList, ListsAndRanges) {
    EXPECT_EQ(parse_int_list("1,3,5"), (std::vector<int>{1, 3, 5}));
    EXPECT_EQ(parse_int_list("1-4"), (std::vector<int>{1, 2, 3, 4}));
    EXPECT_EQ(parse_int_list("2, 5-6"), (std::vector<int>{2, 5, 6}));
    EXPECT_THROW(parse_int_list("4-2"), InputError);
    EXPECT_THROW(parse_int_list("x"), InputError);
    EXPECT_THROW(parse_int_list("1,,2"), InputError);
}

TEST(RunConfig, ParsesKeysOnTopOfBase) {
    std::istringstream in(
        "# comment\n"
        "categories_m = 11\n"
        "categories_f = 9  # trailing\n"
        "link = logit\n"
        "serial_m = gumbel\n"
        "serial_f = sgumbel\n"
        "coupling = t4\n"
        "candidates = bvn,frank\n"
        "t_df = 2-4\n"
        "gradient_tolerance = 1e-7\n"
        "max_iterations = 300\n"
        "flip_mu_sign = true\n"
        "threads = 2\n"
        "data = panel.csv\n");
    const RunConfig c = read_config(in);
    EXPECT_EQ(c.categories_male, 11);
    EXPECT_EQ(c.categories_female, 9);
    EXPECT_EQ(c.link, LinkFunction::Logit);
    EXPECT_EQ(c.families.serial_male.family, CopulaFamily::Gumbel);
    EXPECT_EQ(c.families.serial_female.family, CopulaFamily::SurvivalGumbel);
    EXPECT_EQ(c.families.coupling.family, CopulaFamily::StudentT);
    EXPECT_EQ(c.families.coupling.nu, 4.0);
    EXPECT_EQ(c.candidates, "bvn,frank");
    EXPECT_EQ(c.t_df, (std::vector<int>{2, 3, 4}));
    EXPECT_EQ(c.optimizer.gradient_tolerance, 1e-7);
    EXPECT_EQ(c.optimizer.max_iterations, 300);
    EXPECT_TRUE(c.flip_mu_sign);
    EXPECT_EQ(c.threads, 2);
    EXPECT_EQ(c.data_path, "panel.csv");
    EXPECT_EQ(c.output_path, "");
}

TEST(RunConfig, ErrorsNameTheLine) {
    auto message = [](const std::string& text) {
        std::istringstream in(text);
        try {
            read_config(in);
        } catch (const InputError& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    EXPECT_NE(message("link = probit\nbogus = 1\n").find("line 2"), std::string::npos);
    EXPECT_NE(message("link = cauchit\n").find("line 1"), std::string::npos);
    EXPECT_NE(message("serial_m = clayton\n").find("line 1"), std::string::npos);
    EXPECT_NE(message("\n\nthreads = two\n").find("line 3"), std::string::npos);
    EXPECT_NE(message("no equals sign\n").find("line 1"), std::string::npos);
    EXPECT_NE(message("t_df = 0-2\n").find("degrees of freedom"), std::string::npos);
    EXPECT_NE(message("max_iterations = 0\n"), "no error");
    EXPECT_NE(message("categories_m = 1\n"), "no error");
    EXPECT_NE(message("threads = 0\n"), "no error");
}
