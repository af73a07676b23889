// kmln: generate, compose, classify and verify 4x4 matrices in (k, m, l, n)
// coordinates.
//
// Exit codes: 0 success, 1 verification failure, 2 parse/usage error,
// 3 invalid constants.

#include "kmln/classifier.hpp"
#include "kmln/error.hpp"
#include "kmln/families.hpp"
#include "kmln/harness.hpp"
#include "kmln/io.hpp"
#include "kmln/rank3.hpp"
#include "kmln/sampling.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitConstants = 3;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_input(const std::string& path)
{
    if (path == "-") {
        return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
    }
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw UsageError("cannot open " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

kmln::MatrixDocument load(const std::string& path)
{
    try {
        return kmln::parse_document(read_input(path));
    } catch (const kmln::Error& e) {
        throw UsageError((path == "-" ? std::string("<stdin>") : path) + ": " + e.what());
    }
}

void emit(const std::string& text, const std::string& output)
{
    if (output.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(output, std::ios::binary);
    if (!out)
        throw UsageError("cannot write " + output);
    out << text;
}

std::string valid_names()
{
    std::ostringstream os;
    os << "families:";
    for (kmln::FamilyTag tag : kmln::all_families())
        os << ' ' << kmln::family_name(tag);
    os << "\nvariants:";
    for (kmln::VariantId id : kmln::all_variants())
        os << ' ' << kmln::variant_name(id);
    return os.str();
}

kmln::FamilyConstants parse_constants(const std::vector<std::string>& specs)
{
    kmln::FamilyConstants out;
    for (const std::string& spec : specs) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos)
            throw UsageError("constant '" + spec + "' is not NAME=VALUE");
        const auto name = kmln::parse_constant(spec.substr(0, eq));
        if (!name)
            throw UsageError("unknown constant '" + spec.substr(0, eq) + "' (expected A, B, C, D, alpha, beta, s, t)");
        const auto value = kmln::parse_complex(spec.substr(eq + 1));
        if (!value)
            throw UsageError("bad value in '" + spec + "' (expected RE or RE,IM)");
        out.set(*name, *value);
    }
    return out;
}

struct GenArgs {
    std::string name;
    std::vector<std::string> constants;
    std::uint64_t seed = 0;
    bool real = false;
};

std::string cmd_gen(const GenArgs& args)
{
    kmln::Rng rng(args.seed);
    kmln::MatrixDocument doc;
    kmln::DocumentMeta meta;
    meta.seed = args.seed;
    meta.real_mode = args.real;

    if (const auto tag = kmln::parse_family(args.name)) {
        meta.tag = std::string(kmln::family_name(*tag));
        meta.constants = parse_constants(args.constants);
        const kmln::FamilyInstance inst = kmln::random_instance(*tag, meta.constants, rng, args.real);
        doc.params = kmln::construct(inst);
    } else if (const auto id = kmln::parse_variant(args.name)) {
        if (!args.constants.empty())
            throw UsageError("rank-3 variants take no constants");
        meta.tag = kmln::variant_name(*id);
        doc.params = kmln::construct_variant(*id, kmln::random_params(rng, args.real));
    } else {
        throw UsageError("unknown family or variant '" + args.name + "'\n" + valid_names());
    }
    doc.matrix = kmln::assemble(*doc.params);
    doc.meta = meta;
    return kmln::serialize_document(doc);
}

std::string cmd_compose(const std::string& left_path, const std::string& right_path)
{
    if (left_path == "-" && right_path == "-")
        throw UsageError("only one input may come from stdin");
    const kmln::ParamSetd left = load(left_path).parameters();
    const kmln::ParamSetd right = load(right_path).parameters();
    kmln::MatrixDocument out;
    out.params = kmln::compose(left, right);
    out.matrix = kmln::assemble(*out.params);
    return kmln::serialize_document(out);
}

std::string cmd_rank(const std::string& path, double tol)
{
    const kmln::Mat4d g = load(path).matrix_value();
    nlohmann::ordered_json out;
    out["rank"] = kmln::numeric_rank(g, tol);
    nlohmann::ordered_json sv = nlohmann::ordered_json::array();
    for (double s : kmln::singular_values(g))
        sv.push_back(s);
    out["singular_values"] = sv;
    return out.dump(2) + "\n";
}

struct VerifyArgs {
    std::uint64_t seed = 42;
    int samples = 100;
    double tol = kmln::kDefaultRankTol;
    std::vector<std::string> families;
    std::vector<std::string> variants;
    bool real = false;
    bool strict = false;
    bool serial = false;
    std::string inject_fault;
};

kmln::SuiteConfig suite_config(const VerifyArgs& args)
{
    kmln::SuiteConfig cfg;
    cfg.seed = args.seed;
    cfg.samples_per_check = args.samples;
    cfg.tol = args.tol;
    cfg.real_mode = args.real;
    cfg.parallel = !args.serial;
    if (!args.families.empty() || !args.variants.empty()) {
        cfg.families.clear();
        cfg.variants.clear();
        for (const std::string& name : args.families) {
            const auto tag = kmln::parse_family(name);
            if (!tag)
                throw UsageError("unknown family '" + name + "'\n" + valid_names());
            cfg.families.push_back(*tag);
        }
        for (const std::string& name : args.variants) {
            const auto id = kmln::parse_variant(name);
            if (!id)
                throw UsageError("unknown variant '" + name + "'\n" + valid_names());
            cfg.variants.push_back(*id);
        }
    }
    if (!args.inject_fault.empty()) {
        const auto tag = kmln::parse_family(args.inject_fault);
        if (!tag)
            throw UsageError("unknown family '" + args.inject_fault + "'");
        cfg.inject_fault = tag;
    }
    return cfg;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Four-vector parameterization of 4x4 matrices: families, rank-3 variants, verification"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string output;
    app.add_option("-o,--output", output, "Write the result to this path instead of stdout");

    GenArgs gen;
    auto* gen_cmd = app.add_subcommand("gen", "Generate a family or rank-3 variant member");
    gen_cmd->add_option("name", gen.name, "Family (K-1 .. NLM-1) or variant (00 .. 33)")->required();
    gen_cmd->add_option("-c,--const", gen.constants, "Constant NAME=RE[,IM]; repeatable");
    gen_cmd->add_option("--seed", gen.seed, "RNG seed");
    gen_cmd->add_flag("--real", gen.real, "Sample real (Mueller) matrices");

    std::string classify_input = "-";
    double classify_tol = kmln::kDefaultRankTol;
    auto* classify_cmd = app.add_subcommand("classify", "Rank and every family/variant membership");
    classify_cmd->add_option("input", classify_input, "Document path, - for stdin");
    classify_cmd->add_option("--tol", classify_tol, "Relative tolerance")->check(CLI::PositiveNumber);

    std::string left_path, right_path;
    auto* compose_cmd = app.add_subcommand("compose", "Product left * right computed in parameter space");
    compose_cmd->add_option("left", left_path, "Left factor document")->required();
    compose_cmd->add_option("right", right_path, "Right factor document")->required();

    std::string rank_input = "-";
    double rank_tol = kmln::kDefaultRankTol;
    auto* rank_cmd = app.add_subcommand("rank", "Numeric rank and singular values");
    rank_cmd->add_option("input", rank_input, "Document path, - for stdin");
    rank_cmd->add_option("--tol", rank_tol, "Relative singular value threshold")->check(CLI::PositiveNumber);

    VerifyArgs verify;
    auto* verify_cmd = app.add_subcommand("verify", "Run the seeded verification suite");
    verify_cmd->add_option("--seed", verify.seed, "Suite seed");
    verify_cmd->add_option("--samples", verify.samples, "Samples per check")->check(CLI::PositiveNumber);
    verify_cmd->add_option("--tol", verify.tol, "Membership and rank tolerance")->check(CLI::PositiveNumber);
    verify_cmd->add_option("--family,--families", verify.families, "Restrict to these families; repeatable");
    verify_cmd->add_option("--variant,--variants", verify.variants, "Restrict to these variants; repeatable");
    verify_cmd->add_flag("--real", verify.real, "Real mode");
    verify_cmd->add_flag("--strict", verify.strict, "Treat discrepancies as failures");
    verify_cmd->add_flag("--serial", verify.serial, "Run checks on one thread");
    verify_cmd->add_option("--inject-fault", verify.inject_fault, "Corrupt one family's descriptor (testing)")
        ->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*gen_cmd) {
            emit(cmd_gen(gen), output);
        } else if (*classify_cmd) {
            const kmln::Mat4d g = load(classify_input).matrix_value();
            emit(kmln::serialize_report(kmln::classify(g, classify_tol)), output);
        } else if (*compose_cmd) {
            emit(cmd_compose(left_path, right_path), output);
        } else if (*rank_cmd) {
            emit(cmd_rank(rank_input, rank_tol), output);
        } else if (*verify_cmd) {
            const kmln::FindingsReport report = kmln::run_suite(suite_config(verify));
            emit(kmln::serialize_findings(report), output);
            return report.passed(verify.strict) ? 0 : kExitFailure;
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const kmln::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        switch (e.code()) {
        case kmln::ErrorCode::MissingConstant:
        case kmln::ErrorCode::ZeroConstantRequiringInverse:
            return kExitConstants;
        default:
            return kExitUsage;
        }
    }
    return 0;
}
