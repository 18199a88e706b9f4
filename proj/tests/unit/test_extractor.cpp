#include "fixtures.hpp"
#include "oracle.hpp"

#include "lancekit/errors.hpp"
#include "lancekit/extractor.hpp"

#include <doctest.h>

using namespace lancekit;

namespace {

std::set<std::pair<std::string, std::string>> extracted(const RepoIndex& index) {
    std::set<std::pair<std::string, std::string>> out;
    for (const ApiFunction& fn : index.functions) out.emplace(fn.file, fn.qualified_name());
    return out;
}

const ApiFunction& only(const RepoIndex& index, std::string_view qualified) {
    auto found = index.functions_named(qualified);
    REQUIRE(found.size() == 1);
    return *found.front();
}

std::vector<ImportBinding> imports_of(std::string_view source, Language language, std::string_view file) {
    return extract_imports(SyntaxTree::parse(std::string(source), language), file);
}

}  // namespace

TEST_CASE("extracted functions equal the committed manifests") {
    CHECK(extracted(fixtures::python_index()) ==
          oracle::read_manifest(fixtures::root() / "manifests" / "python_hotel.txt"));
    CHECK(extracted(fixtures::java_index()) == oracle::read_manifest(fixtures::root() / "manifests" / "java_hotel.txt"));
}

TEST_CASE("text_processing owns twelve functions") {
    std::size_t owned = 0;
    for (const ApiFunction& fn : fixtures::python_index().functions) owned += fn.owner == "text_processing";
    CHECK(owned == 12);
}

TEST_CASE("process_payment keeps typed parameters and return type") {
    const ApiFunction& fn = only(fixtures::python_index(), "payment_processor.process_payment");
    REQUIRE(fn.parameters.size() == 2);
    CHECK(fn.parameters[0].name == "name");
    CHECK(fn.parameters[0].declared_type == "str");
    CHECK(fn.parameters[1].name == "payment");
    CHECK(fn.parameters[1].declared_type == "Payment");
    CHECK(fn.return_type == "bool");
    CHECK(fn.visibility == Visibility::Unspecified);
    CHECK(fn.comment.has_value());
}

TEST_CASE("tokenize signature") {
    const ApiFunction& fn = only(fixtures::python_index(), "text_processing.tokenize");
    REQUIRE(fn.parameters.size() == 1);
    CHECK(fn.parameters[0].name == "text");
    CHECK(fn.parameters[0].declared_type == "str");
    CHECK(fn.return_type == "List[str]");
}

TEST_CASE("unannotated python def has no types") {
    auto fns = extract_functions(SyntaxTree::parse("def f(a, b=1, *args, **kw):\n    return a\n", Language::Python), "m.py");
    REQUIRE(fns.size() == 1);
    CHECK(fns[0].return_type == std::nullopt);
    REQUIRE(fns[0].parameters.size() == 4);
    for (const Parameter& p : fns[0].parameters) CHECK(p.declared_type == std::nullopt);
    CHECK(fns[0].parameters[0].name == "a");
    CHECK(fns[0].parameters[1].name == "b");
}

TEST_CASE("file without declarations yields nothing") {
    CHECK(extract_functions(SyntaxTree::parse("x = 1\nprint(x)\n", Language::Python), "m.py").empty());
    CHECK(extract_functions(SyntaxTree::parse("", Language::Python), "m.py").empty());
    CHECK(extract_functions(SyntaxTree::parse("package p;\n", Language::Java), "p/A.java").empty());
}

TEST_CASE("python methods drop self and carry docstrings") {
    const char* source =
        "class Box:\n"
        "    \"\"\"A box.\"\"\"\n"
        "    def put(self, item: int) -> None:\n"
        "        \"\"\"Store an item.\n\n        :param item: what to store\n        \"\"\"\n"
        "        def helper():\n"
        "            pass\n"
        "        helper()\n";
    const FileExtraction out = extract_file(SyntaxTree::parse(source, Language::Python), "pkg/box.py");
    REQUIRE(out.functions.size() == 2);
    const ApiFunction& put = out.functions[0];
    CHECK(put.owner == "pkg.box.Box");
    REQUIRE(put.parameters.size() == 1);
    CHECK(put.parameters[0].name == "item");
    CHECK(put.parameters[0].comment == "what to store");
    CHECK(put.comment.has_value());
    const ApiFunction& helper = out.functions[1];
    CHECK(helper.name == "helper");
    CHECK(helper.visibility == Visibility::Private);
    REQUIRE(out.entities.size() >= 1);
}

TEST_CASE("nested fixture function is private") {
    const auto found = fixtures::python_index().functions_named("hotel.Hotel.clear");
    REQUIRE(found.size() == 1);
    CHECK(found.front()->visibility == Visibility::Private);
}

TEST_CASE("java visibility, javadoc, overloads and varargs") {
    const RepoIndex& index = fixtures::java_index();
    const auto translate = index.functions_named("com.hotel.text.TextProcessing.translate");
    CHECK(translate.size() == 2);
    const ApiFunction& sentiment = only(index, "com.hotel.text.TextProcessing.sentimentAnalysis");
    CHECK(sentiment.visibility == Visibility::Public);
    CHECK(sentiment.comment.has_value());
    CHECK(sentiment.return_type == "String");
    CHECK(only(index, "com.hotel.text.TextProcessing.normalize").visibility == Visibility::Private);
    CHECK(only(index, "com.hotel.Hotel.occupancy").visibility == Visibility::Package);
    const ApiFunction& notify = only(index, "com.hotel.HotelManagementSystem.Notifier.notifyGuest");
    CHECK(notify.visibility == Visibility::Public);
    REQUIRE(notify.parameters.size() == 2);
    CHECK(notify.parameters[1].declared_type == "String...");
}

TEST_CASE("python import bindings") {
    auto tp = imports_of("import text_processing as tp\n", Language::Python, "main.py");
    REQUIRE(tp.size() == 1);
    CHECK(tp[0].local_name == "tp");
    CHECK(tp[0].target == "text_processing");
    CHECK(tp[0].kind == ImportKind::ModuleAlias);

    auto hotel = imports_of("from hotel import Hotel\n", Language::Python, "main.py");
    REQUIRE(hotel.size() == 1);
    CHECK(hotel[0].local_name == "Hotel");
    CHECK(hotel[0].target == "hotel.Hotel");
    CHECK(hotel[0].kind == ImportKind::EntityImport);

    auto star = imports_of("from util import *\n", Language::Python, "main.py");
    REQUIRE(star.size() == 1);
    CHECK(star[0].local_name.empty());
    CHECK(star[0].kind == ImportKind::Wildcard);

    auto relative = imports_of("from .user import User\n", Language::Python, "pkg/review.py");
    REQUIRE(relative.size() == 1);
    CHECK(relative[0].relative);
    CHECK(relative[0].target == "pkg.user.User");

    CHECK(imports_of("x = 1\n", Language::Python, "main.py").empty());
}

TEST_CASE("java import bindings") {
    auto single = imports_of("import com.hotel.payment.Payment;\n", Language::Java, "A.java");
    REQUIRE(single.size() == 1);
    CHECK(single[0].local_name == "Payment");
    CHECK(single[0].target == "com.hotel.payment.Payment");
    CHECK(single[0].kind == ImportKind::EntityImport);

    auto star = imports_of("import java.util.*;\n", Language::Java, "A.java");
    REQUIRE(star.size() == 1);
    CHECK(star[0].local_name.empty());
    CHECK(star[0].target == "java.util");
    CHECK(star[0].kind == ImportKind::Wildcard);

    CHECK(imports_of("class A {}\n", Language::Java, "A.java").empty());
}

TEST_CASE("fixture imports resolve and mark externals") {
    const RepoIndex& index = fixtures::python_index();
    bool saw_tp = false;
    for (const ImportBinding& b : index.imports_for(fixtures::kPythonMain)) {
        if (b.local_name == "tp") {
            saw_tp = true;
            CHECK(b.target == "text_processing");
            CHECK_FALSE(b.external);
        }
    }
    CHECK(saw_tp);
    bool saw_external = false;
    for (const ImportBinding& b : fixtures::java_index().imports_for(fixtures::kJavaMain)) {
        if (b.target == "java.util") saw_external = b.external;
    }
    CHECK(saw_external);
}

TEST_CASE("traversal visits every node exactly once") {
    for (const auto& [repo, language] : {std::pair{fixtures::python_repo(), Language::Python},
                                         std::pair{fixtures::java_repo(), Language::Java}}) {
        for (const std::string& file : candidate_files(repo, language, {})) {
            const SyntaxTree tree = SyntaxTree::parse(fixtures::read(repo / file), language);
            CHECK_MESSAGE(extract_file(tree, file).nodes_visited == tree.size(), file);
        }
    }
    const SyntaxTree broken = SyntaxTree::parse("def f(:\n  pass\nclass\n", Language::Python);
    CHECK(broken.has_error());
    CHECK(extract_file(broken, "b.py").nodes_visited == broken.size());
}

TEST_CASE("indexing is deterministic and validated") {
    const RepoIndex again = index_repository(fixtures::python_repo(), Language::Python, fixtures::fixed_options());
    CHECK(serialize_index(again) == serialize_index(fixtures::python_index()));
    IndexOptions single = fixtures::fixed_options();
    single.threads = 1;
    CHECK(serialize_index(index_repository(fixtures::java_repo(), Language::Java, single)) ==
          serialize_index(fixtures::java_index()));
}

TEST_CASE("function keys are unique per file and span") {
    for (const RepoIndex* index : {&fixtures::python_index(), &fixtures::java_index()}) {
        std::set<std::pair<std::string, std::size_t>> seen;
        for (const ApiFunction& fn : index->functions) {
            CHECK(seen.emplace(fn.file, fn.span.start).second);
            CHECK(fn.span.start < fn.span.end);
            CHECK_FALSE(fn.name.empty());
        }
    }
}

TEST_CASE("repository errors") {
    fixtures::TempDir dir;
    CHECK_THROWS_AS(index_repository(dir.path() / "missing", Language::Python), IoError);
    CHECK_THROWS_AS(index_repository(dir.path(), Language::Python), EmptyRepoError);
    fixtures::write(dir.path() / "notes.txt", "hello");
    CHECK_THROWS_AS(index_repository(dir.path(), Language::Python), EmptyRepoError);
}

TEST_CASE("broken files are skipped, excluded paths ignored") {
    fixtures::TempDir dir;
    fixtures::write(dir.path() / "good.py", "def ok(x: int) -> int:\n    return x\n");
    fixtures::write(dir.path() / "bad.py", "def broken(:\n");
    fixtures::write(dir.path() / "vendor" / "lib.py", "def vendored():\n    pass\n");
    fixtures::write(dir.path() / ".hidden" / "h.py", "def hidden():\n    pass\n");
    std::vector<std::string> skipped;
    IndexOptions options;
    options.exclude_globs = {"vendor"};
    options.on_skip = [&](const std::string& line) { skipped.push_back(line); };
    const RepoIndex index = index_repository(dir.path(), Language::Python, options);
    REQUIRE(index.functions.size() == 1);
    CHECK(index.functions[0].name == "ok");
    REQUIRE(index.skipped_files.size() == 1);
    CHECK(index.skipped_files[0].find("bad.py") != std::string::npos);
    CHECK(skipped.size() == 1);
}

TEST_CASE("python module names") {
    CHECK(python_module_name("pkg/mod.py") == "pkg.mod");
    CHECK(python_module_name("pkg/__init__.py") == "pkg");
    CHECK(python_module_name("top.py") == "top");
}
