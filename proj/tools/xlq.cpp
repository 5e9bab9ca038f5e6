#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "xlq/catalog.hpp"
#include "xlq/engine.hpp"
#include "xlq/error.hpp"
#include "xlq/oracle.hpp"
#include "xlq/specialize.hpp"
#include "xlq/store.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double secs(Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw xlq::IoError("cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

xlq::XmlTree rebuild_document(const xlq::Program& program,
                              const xlq::FactStore& store) {
    xlq::StoreCounters c;
    std::vector<xlq::RebuildAtom> atoms;
    for (long i = 0; i < store.fact_count(); ++i) {
        xlq::Fact f = store.fact_at(i, c);
        atoms.push_back({f.pred, xlq::Term::text(f.value), f.node, f.type});
    }
    auto doc = xlq::rebuild_doc(program.rules, atoms, nullptr);
    if (!doc) throw xlq::StoreCorrupt("store holds no facts");
    return xlq::strip_numbering(*doc);
}

int cmd_load(const std::string& xml_path, const std::string& store_dir) {
    auto t0 = Clock::now();
    xlq::XmlTree doc = xlq::parse_xml(read_file(xml_path));
    xlq::NumberedTree numbered = xlq::number_tree(doc);
    xlq::Program p = xlq::translate(numbered);
    auto t1 = Clock::now();
    xlq::write_store(p, store_dir);
    std::cout << p.rules.size() << " rules, " << p.facts.size() << " facts\n";
    std::cout << "translation: " << secs(t0, t1) * 1000.0 << " ms\n";
    return 0;
}

int cmd_query(const std::string& store_dir, const std::string& query,
              bool no_specialize, bool no_index, bool with_oracle, bool trace,
              bool answers, bool timing) {
    xlq::OpenedStore os = xlq::open_store(store_dir);
    xlq::XPathExpr q = xlq::parse_xpath(query);

    xlq::Engine engine(os.program, *os.store);
    xlq::EvalOptions opt;
    opt.specialize = !no_specialize;
    opt.use_index = !no_index;
    if (trace) opt.trace = [](const std::string& line) { std::cout << line << "\n"; };

    auto t0 = Clock::now();
    xlq::EvalResult res = engine.evaluate(q, opt);
    auto t1 = Clock::now();
    std::string text = xlq::serialize(res.result);
    auto t2 = Clock::now();

    if (answers)
        for (auto& line : res.answer_lines) std::cout << "answer: " << line << "\n";
    std::cout << text << "\n";
    if (timing) {
        std::cout << "evaluation: " << secs(t0, t1) * 1000.0 << " ms\n";
        std::cout << "browsing: " << secs(t1, t2) * 1000.0 << " ms\n";
        std::cout << "index1: " << res.counters.index1_hits
                  << " index2: " << res.counters.index2_hits
                  << " facts: " << res.counters.facts_scanned << "\n";
    }
    if (with_oracle) {
        xlq::XmlTree doc = rebuild_document(os.program, *os.store);
        xlq::XmlNode expect = xlq::oracle::answer(doc, q);
        if (xlq::serialize(expect) != text) {
            std::cerr << "oracle mismatch:\n  engine: " << text
                      << "\n  oracle: " << xlq::serialize(expect) << "\n";
            return 4;
        }
        std::cout << "oracle: match\n";
    }
    return 0;
}

int cmd_explain(const std::string& store_dir, const std::string& query) {
    xlq::OpenedStore os = xlq::open_store(store_dir);
    xlq::XPathExpr q = xlq::parse_xpath(query);
    std::cout << xlq::explain(os.program, q);
    return 0;
}

struct BenchRow {
    std::string label;
    double translation = 0;
    double evaluation = 0;
    double browsing = 0;
    long facts = 0;
};

int cmd_bench(const std::string& store_template, const std::vector<int>& sizes,
              const std::string& queries_path) {
    std::vector<std::string> queries;
    {
        std::ifstream f(queries_path);
        if (!f) throw xlq::IoError("cannot open " + queries_path);
        std::string line;
        while (std::getline(f, line))
            if (!line.empty()) queries.push_back(line);
    }

    struct Config {
        const char* name;
        bool specialize;
        bool index;
    };
    const Config configs[] = {{"specialized+indexed", true, true},
                              {"specialized+scan", true, false},
                              {"unspecialized+indexed", false, true},
                              {"unspecialized+scan", false, false}};

    for (int kb : sizes) {
        std::string dir = store_template + "/" + std::to_string(kb) + "kb";
        auto t0 = Clock::now();
        std::string xml = xlq::generate_catalog(static_cast<size_t>(kb) * 1024);
        xlq::XmlTree doc = xlq::parse_xml(xml);
        xlq::Program p = xlq::translate(xlq::number_tree(doc));
        auto t1 = Clock::now();
        xlq::write_store(p, dir);
        double translation = secs(t0, t1);

        xlq::OpenedStore os = xlq::open_store(dir);
        xlq::Engine engine(os.program, *os.store);

        std::cout << "== " << kb << "KB (" << p.facts.size() << " facts, "
                  << p.rules.size() << " rules, translation " << translation * 1000.0
                  << " ms)\n";
        for (auto& qs : queries) {
            xlq::XPathExpr q = xlq::parse_xpath(qs);
            std::cout << "query: " << qs << "\n";
            std::cout << "  config                  evaluation   browsing     facts\n";
            double spec_eval = 0, unspec_eval = 0;
            for (auto& cfg : configs) {
                xlq::EvalOptions opt;
                opt.specialize = cfg.specialize;
                opt.use_index = cfg.index;
                auto e0 = Clock::now();
                xlq::EvalResult res = engine.evaluate(q, opt);
                auto e1 = Clock::now();
                std::string text = xlq::serialize(res.result);
                auto e2 = Clock::now();
                (void)text;
                double ev = secs(e0, e1), br = secs(e1, e2);
                if (cfg.specialize && cfg.index) spec_eval = ev;
                if (!cfg.specialize && cfg.index) unspec_eval = ev;
                char buf[160];
                std::snprintf(buf, sizeof(buf), "  %-22s %9.3f ms %9.3f ms %9ld",
                              cfg.name, ev * 1000.0, br * 1000.0,
                              res.counters.facts_scanned);
                std::cout << buf << "\n";
            }
            if (spec_eval > 0)
                std::cout << "  speedup (unspecialized/specialized, indexed): "
                          << unspec_eval / spec_eval << "x\n";
        }
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"XPath evaluation over XML documents translated to logic programs"};
    app.require_subcommand(1);

    std::string xml_path, store_dir, query, queries_path, sizes_arg = "64,128,256,512";
    bool no_specialize = false, no_index = false, with_oracle = false;
    bool trace = false, answers = false, timing = false;

    auto* load = app.add_subcommand("load", "translate an XML file into a store");
    load->add_option("xml", xml_path)->required();
    load->add_option("store", store_dir)->required();

    auto* qcmd = app.add_subcommand("query", "answer an XPath query against a store");
    qcmd->add_option("store", store_dir)->required();
    qcmd->add_option("xpath", query)->required();
    qcmd->add_flag("--no-specialize", no_specialize,
                   "evaluate against the unspecialized rules");
    qcmd->add_flag("--no-index", no_index, "force linear fact scans");
    qcmd->add_flag("--oracle", with_oracle,
                   "also run the tree-semantics oracle and diff");
    qcmd->add_flag("--trace", trace, "log calls and index accesses");
    qcmd->add_flag("--answers", answers, "dump goal substitutions");
    qcmd->add_flag("--time", timing, "report evaluation and browsing times");

    auto* ecmd = app.add_subcommand("explain", "show the specialization of a query");
    ecmd->add_option("store", store_dir)->required();
    ecmd->add_option("xpath", query)->required();

    auto* bcmd = app.add_subcommand("bench", "generate catalogs and time queries");
    bcmd->add_option("store-template", store_dir)->required();
    bcmd->add_option("--sizes", sizes_arg, "comma-separated sizes in KB");
    bcmd->add_option("--queries", queries_path, "file with one query per line")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (load->parsed()) return cmd_load(xml_path, store_dir);
        if (qcmd->parsed())
            return cmd_query(store_dir, query, no_specialize, no_index, with_oracle,
                             trace, answers, timing);
        if (ecmd->parsed()) return cmd_explain(store_dir, query);
        if (bcmd->parsed()) {
            std::vector<int> sizes;
            std::stringstream ss(sizes_arg);
            std::string tok;
            while (std::getline(ss, tok, ','))
                if (!tok.empty()) sizes.push_back(std::stoi(tok));
            return cmd_bench(store_dir, sizes, queries_path);
        }
    } catch (const xlq::QueryParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const xlq::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const xlq::ReservedAttribute& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const xlq::UnsupportedFeature& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const xlq::StoreCorrupt& e) {
        std::cerr << e.what() << "\n";
        return 3;
    } catch (const xlq::IoError& e) {
        std::cerr << e.what() << "\n";
        return 3;
    } catch (const xlq::XlqError& e) {
        std::cerr << e.what() << "\n";
        return 4;
    }
    return 1;
}
