#include "kmln/io.hpp"

#include "kmln/error.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <sstream>

namespace kmln {

namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& where, const std::string& what)
{
    throw Error(ErrorCode::Parse, "at " + where + ": " + what);
}

Json to_json(Complexd z) { return Json::array({z.real(), z.imag()}); }

Json to_json(const CVec4d& c)
{
    Json out = Json::array();
    for (int i = 0; i < 4; ++i)
        out.push_back(to_json(c[i]));
    return out;
}

Json to_json(const ParamSetd& p)
{
    Json out = Json::object();
    for (Vec w : kAllVecs)
        out[std::string(1, vec_name(w))] = to_json(p[w]);
    return out;
}

Json to_json(const Mat4d& g)
{
    Json out = Json::array();
    for (int r = 0; r < 4; ++r) {
        Json row = Json::array();
        for (int c = 0; c < 4; ++c)
            row.push_back(to_json(g(r, c)));
        out.push_back(row);
    }
    return out;
}

Json to_json(const FamilyConstants& constants)
{
    Json out = Json::object();
    for (auto [c, v] : constants.present())
        out[std::string(constant_name(c))] = to_json(v);
    return out;
}

Complexd complex_from(const Json& j, const std::string& where)
{
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        fail(where, "expected a complex number [re, im]");
    const double re = j[0].get<double>();
    const double im = j[1].get<double>();
    if (!std::isfinite(re) || !std::isfinite(im))
        fail(where, "non-finite number");
    return {re, im};
}

CVec4d cvec_from(const Json& j, const std::string& where)
{
    if (!j.is_array() || j.size() != 4)
        fail(where, "expected 4 complex components");
    CVec4d c;
    for (std::size_t i = 0; i < 4; ++i)
        c[static_cast<int>(i)] = complex_from(j[i], where + "/" + std::to_string(i));
    return c;
}

ParamSetd params_from(const Json& j, const std::string& where)
{
    if (!j.is_object())
        fail(where, "expected an object with k, m, l, n");
    ParamSetd p;
    for (Vec w : kAllVecs) {
        const std::string key(1, vec_name(w));
        if (!j.contains(key))
            fail(where, "missing vector '" + key + "'");
        p[w] = cvec_from(j.at(key), where + "/" + key);
    }
    for (const auto& [key, value] : j.items())
        if (key.size() != 1 || std::string_view("kmln").find(key[0]) == std::string_view::npos)
            fail(where + "/" + key, "unexpected key");
    return p;
}

Mat4d matrix_from(const Json& j, const std::string& where)
{
    if (!j.is_array() || j.size() != 4)
        fail(where, "expected 4 rows");
    Mat4d g;
    for (std::size_t r = 0; r < 4; ++r) {
        const std::string row_where = where + "/" + std::to_string(r);
        if (!j[r].is_array() || j[r].size() != 4)
            fail(row_where, "expected 4 entries");
        for (std::size_t c = 0; c < 4; ++c)
            g(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c))
                = complex_from(j[r][c], row_where + "/" + std::to_string(c));
    }
    return g;
}

DocumentMeta meta_from(const Json& j, const std::string& where)
{
    if (!j.is_object())
        fail(where, "expected an object");
    DocumentMeta meta;
    if (j.contains("tag")) {
        if (!j["tag"].is_string())
            fail(where + "/tag", "expected a string");
        meta.tag = j["tag"].get<std::string>();
    }
    if (j.contains("constants")) {
        const Json& cj = j["constants"];
        if (!cj.is_object())
            fail(where + "/constants", "expected an object");
        for (const auto& [name, value] : cj.items()) {
            const auto c = parse_constant(name);
            if (!c)
                fail(where + "/constants/" + name, "unknown constant");
            meta.constants.set(*c, complex_from(value, where + "/constants/" + name));
        }
    }
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned())
            fail(where + "/seed", "expected a non-negative integer");
        meta.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("real")) {
        if (!j["real"].is_boolean())
            fail(where + "/real", "expected a boolean");
        meta.real_mode = j["real"].get<bool>();
    }
    return meta;
}

void cross_check(const MatrixDocument& doc)
{
    if (doc.matrix && doc.params) {
        const Mat4d from_params = assemble(*doc.params);
        const double err = relative_error((from_params - *doc.matrix).cwiseAbs().maxCoeff(), doc.matrix->norm());
        if (err > 1e-12)
            fail("/matrix", "does not match /params");
    }
    if (!doc.meta || doc.meta->tag.empty())
        return;
    const ParamSetd p = doc.parameters();
    if (const auto tag = parse_family(doc.meta->tag)) {
        const ConstraintDescriptor& d = descriptor(*tag);
        for (Constant c : d.constants)
            if (!doc.meta->constants.has(c))
                fail("/meta/constants", "missing constant " + std::string(constant_name(c)) + " for " + doc.meta->tag);
        if (relative_rule_residual(d, doc.meta->constants, p) > kDefaultRankTol)
            fail("/meta", "document is not a member of " + doc.meta->tag + " with the given constants");
    } else if (const auto id = parse_variant(doc.meta->tag)) {
        if (zero_pattern_residual(*id, assemble(p)) > kDefaultRankTol)
            fail("/meta", "document does not have the zero pattern of variant " + doc.meta->tag);
    } else {
        fail("/meta/tag", "unknown family or variant '" + doc.meta->tag + "'");
    }
}

} // namespace

ParamSetd MatrixDocument::parameters() const
{
    if (params)
        return *params;
    if (matrix)
        return disassemble(*matrix);
    return ParamSetd::Zero();
}

Mat4d MatrixDocument::matrix_value() const
{
    if (matrix)
        return *matrix;
    return assemble(parameters());
}

MatrixDocument parse_document(std::string_view text)
{
    Json j;
    try {
        j = Json::parse(text.begin(), text.end());
    } catch (const Json::parse_error& e) {
        fail("byte " + std::to_string(e.byte), e.what());
    } catch (const Json::out_of_range& e) {
        fail("/", e.what());
    }
    if (!j.is_object())
        fail("/", "expected a JSON object");

    MatrixDocument doc;
    for (const auto& [key, value] : j.items()) {
        if (key == "matrix")
            doc.matrix = matrix_from(value, "/matrix");
        else if (key == "params")
            doc.params = params_from(value, "/params");
        else if (key == "meta")
            doc.meta = meta_from(value, "/meta");
        else
            fail("/" + key, "unexpected key");
    }
    if (!doc.matrix && !doc.params)
        fail("/", "document needs \"matrix\" or \"params\"");
    cross_check(doc);
    return doc;
}

std::string serialize_document(const MatrixDocument& doc)
{
    Json out = Json::object();
    if (doc.params)
        out["params"] = to_json(*doc.params);
    if (doc.matrix)
        out["matrix"] = to_json(*doc.matrix);
    if (doc.meta) {
        Json meta = Json::object();
        meta["tag"] = doc.meta->tag;
        meta["constants"] = to_json(doc.meta->constants);
        if (doc.meta->seed)
            meta["seed"] = *doc.meta->seed;
        if (doc.meta->real_mode)
            meta["real"] = *doc.meta->real_mode;
        out["meta"] = meta;
    }
    return out.dump(2) + "\n";
}

std::string serialize_report(const ClassReport& report)
{
    Json out = Json::object();
    out["rank"] = report.rank;
    out["real_matrix"] = report.real_matrix;
    out["residual_scale"] = report.residual_scale;
    Json families = Json::array();
    for (const Membership& m : report.families) {
        Json entry = Json::object();
        entry["tag"] = family_name(m.tag);
        entry["residual"] = m.residual;
        entry["constants"] = to_json(m.recovered);
        Json indeterminate = Json::array();
        for (Constant c : m.indeterminate)
            indeterminate.push_back(constant_name(c));
        entry["indeterminate"] = indeterminate;
        families.push_back(entry);
    }
    out["families"] = families;
    Json variants = Json::array();
    for (VariantId id : report.variants)
        variants.push_back(variant_name(id));
    out["variants"] = variants;
    return out.dump(2) + "\n";
}

std::string serialize_findings(const FindingsReport& report)
{
    std::ostringstream os;
    for (const Finding& f : report.findings) {
        Json line = Json::object();
        line["check"] = f.check;
        line["subject"] = f.subject;
        line["status"] = status_name(f.status);
        line["worst_residual"] = f.worst_residual;
        line["observed_rank"] = f.observed_rank ? Json(*f.observed_rank) : Json(nullptr);
        line["claimed_rank"] = f.claimed_rank ? Json(*f.claimed_rank) : Json(nullptr);
        if (f.counterexample)
            line["counterexample"] = Json{{"left", to_json(f.counterexample->first)},
                                          {"right", to_json(f.counterexample->second)}};
        else
            line["counterexample"] = nullptr;
        line["detail"] = f.detail;
        os << line.dump() << "\n";
    }
    Json summary = Json::object();
    summary["summary"] = Json{{"seed", report.config.seed},
                              {"samples", report.config.samples_per_check},
                              {"tol", report.config.tol},
                              {"real", report.config.real_mode},
                              {"checks", report.findings.size()},
                              {"pass", report.count(CheckStatus::Pass)},
                              {"fail", report.count(CheckStatus::Fail)},
                              {"discrepancy", report.count(CheckStatus::Discrepancy)}};
    os << summary.dump() << "\n";
    return os.str();
}

std::optional<Complexd> parse_complex(std::string_view text)
{
    auto number = [](std::string_view s) -> std::optional<double> {
        double v = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
            return std::nullopt;
        return v;
    };
    const auto comma = text.find(',');
    const auto re = number(text.substr(0, comma));
    if (!re)
        return std::nullopt;
    if (comma == std::string_view::npos)
        return Complexd(*re, 0.0);
    const auto im = number(text.substr(comma + 1));
    if (!im)
        return std::nullopt;
    return Complexd(*re, *im);
}

} // namespace kmln
