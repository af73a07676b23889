#include "kmln/io.hpp"

#include <gtest/gtest.h>

#include <json.hpp>

namespace {

using namespace kmln;
using Json = nlohmann::ordered_json;

std::string parse_error(std::string_view text)
{
    try {
        parse_document(text);
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::Parse);
        return e.what();
    }
    ADD_FAILURE() << "no error for " << text;
    return {};
}

Json complex_json(Complexd z) { return Json::array({z.real(), z.imag()}); }

Json identity_matrix()
{
    Json rows = Json::array();
    for (int i = 0; i < 4; ++i) {
        Json row = Json::array();
        for (int j = 0; j < 4; ++j)
            row.push_back(complex_json(i == j ? 1.0 : 0.0));
        rows.push_back(row);
    }
    return rows;
}

TEST(Document, MatrixOnly)
{
    const Json j{{"matrix", identity_matrix()}};
    const MatrixDocument doc = parse_document(j.dump());
    ASSERT_TRUE(doc.matrix);
    EXPECT_FALSE(doc.params);
    EXPECT_EQ(*doc.matrix, Mat4d::Identity());
    EXPECT_EQ(doc.parameters().k.c0, Complexd(1));
    EXPECT_EQ(doc.parameters().m.c0, Complexd(1));
}

TEST(Document, ParamsOnly)
{
    Json params = Json::object();
    for (const char* v : {"k", "m", "l", "n"})
        params[v] = Json::array({complex_json(0), complex_json(0), complex_json(0), complex_json(0)});
    params["n"][2] = complex_json({0, 3});
    const MatrixDocument doc = parse_document(Json{{"params", params}}.dump());
    ASSERT_TRUE(doc.params);
    EXPECT_EQ(doc.params->n.v(1), Complexd(0, 3));
    EXPECT_EQ(doc.matrix_value(), assemble(*doc.params));
}

TEST(Document, LosslessRoundTrip)
{
    Rng rng(1);
    for (int i = 0; i < 50; ++i) {
        MatrixDocument doc;
        doc.params = random_params(rng);
        doc.matrix = assemble(*doc.params);
        doc.meta = DocumentMeta{"", {{Constant::A, random_complex(rng)}}, 7, false};
        const std::string text = serialize_document(doc);
        const MatrixDocument back = parse_document(text);
        EXPECT_EQ(to_vector(*back.params), to_vector(*doc.params));
        EXPECT_EQ(*back.matrix, *doc.matrix);
        EXPECT_EQ(back.meta->constants, doc.meta->constants);
        EXPECT_EQ(back.meta->seed, 7u);
        EXPECT_EQ(serialize_document(back), text);
    }
}

TEST(Document, KeyOrder)
{
    MatrixDocument doc;
    doc.params = ParamSetd::Identity();
    doc.matrix = Mat4d::Identity();
    doc.meta = DocumentMeta{"K-2", {}, 3, std::nullopt};
    const std::string text = serialize_document(doc);
    EXPECT_LT(text.find("\"params\""), text.find("\"matrix\""));
    EXPECT_LT(text.find("\"matrix\""), text.find("\"meta\""));
    EXPECT_NO_THROW(parse_document(text));
}

TEST(Document, PositionBearingErrors)
{
    EXPECT_NE(parse_error("{\"matrix\": [1, 2").find("at byte "), std::string::npos);
    EXPECT_NE(parse_error("[]").find("at /:"), std::string::npos);
    EXPECT_NE(parse_error("{}").find("\"matrix\" or \"params\""), std::string::npos);
    EXPECT_NE(parse_error("{\"foo\": 1}").find("at /foo"), std::string::npos);

    Json j{{"matrix", identity_matrix()}};
    j["matrix"][2][3] = "x";
    EXPECT_NE(parse_error(j.dump()).find("at /matrix/2/3"), std::string::npos);

    j = Json{{"matrix", identity_matrix()}};
    j["matrix"][1].erase(0);
    EXPECT_NE(parse_error(j.dump()).find("at /matrix/1"), std::string::npos);

    j = Json{{"params", {{"k", Json::array()}}}};
    EXPECT_NE(parse_error(j.dump()).find("at /params"), std::string::npos);
}

TEST(Document, NonFiniteRejected)
{
    Json j{{"matrix", identity_matrix()}};
    j["matrix"][0][0] = Json::array({1e308, 0});
    EXPECT_NO_THROW(parse_document(j.dump()));
    const std::string text = R"({"matrix": [[[1e999, 0]]]})";
    EXPECT_THROW(parse_document(text), Error);
}

TEST(Document, CrossChecks)
{
    MatrixDocument doc;
    doc.params = ParamSetd::Identity();
    doc.matrix = Mat4d::Identity();
    doc.meta = DocumentMeta{"K-2", {}, std::nullopt, std::nullopt};
    EXPECT_NO_THROW(parse_document(serialize_document(doc)));

    doc.meta->tag = "K-3";
    EXPECT_NE(parse_error(serialize_document(doc)).find("/meta/constants"), std::string::npos);
    doc.meta->constants.set(Constant::D, 1.0);
    EXPECT_NE(parse_error(serialize_document(doc)).find("not a member of K-3"), std::string::npos);

    doc.meta->tag = "00";
    EXPECT_NE(parse_error(serialize_document(doc)).find("zero pattern"), std::string::npos);

    doc.meta->tag = "Q-1";
    EXPECT_NE(parse_error(serialize_document(doc)).find("/meta/tag"), std::string::npos);

    doc.meta.reset();
    (*doc.matrix)(0, 0) = 2.0;
    EXPECT_NE(parse_error(serialize_document(doc)).find("does not match /params"), std::string::npos);
}

TEST(Report, ClassifyFields)
{
    const std::string text = serialize_report(classify(Mat4d::Identity()));
    const Json j = Json::parse(text);
    EXPECT_EQ(j["rank"], 4);
    EXPECT_EQ(j["real_matrix"], true);
    EXPECT_TRUE(j["variants"].empty());
    bool k2 = false;
    for (const auto& f : j["families"])
        k2 |= f["tag"] == "K-2";
    EXPECT_TRUE(k2);
    EXPECT_EQ(text, serialize_report(classify(Mat4d::Identity())));
}

TEST(Report, FindingsLines)
{
    SuiteConfig cfg;
    cfg.families = {FamilyTag::K3};
    cfg.variants = {{0, 0}};
    cfg.samples_per_check = 1;
    const FindingsReport r = run_suite(cfg);
    const std::string text = serialize_findings(r);
    std::istringstream in(text);
    std::string line;
    std::size_t lines = 0;
    Json last;
    while (std::getline(in, line)) {
        last = Json::parse(line);
        ++lines;
    }
    EXPECT_EQ(lines, r.findings.size() + 1);
    EXPECT_EQ(last["summary"]["checks"], r.findings.size());
    EXPECT_EQ(last["summary"]["fail"], 0);
}

TEST(Complex, Parse)
{
    EXPECT_EQ(parse_complex("2"), Complexd(2));
    EXPECT_EQ(parse_complex("2,-0.5"), Complexd(2, -0.5));
    EXPECT_EQ(parse_complex("-1e-3,1"), Complexd(-1e-3, 1));
    EXPECT_FALSE(parse_complex(""));
    EXPECT_FALSE(parse_complex("x"));
    EXPECT_FALSE(parse_complex("1,"));
    EXPECT_FALSE(parse_complex("1,2,3"));
    EXPECT_FALSE(parse_complex("inf"));
}

} // namespace
