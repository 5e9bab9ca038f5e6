#include "xlq/catalog.hpp"

#include <random>
#include <vector>

namespace xlq {

std::string generate_catalog(size_t target_bytes, uint64_t seed) {
    static const std::vector<std::string> authors = {
        "Abiteboul", "Buneman",  "Suciu",   "Benz",    "Durant",
        "Esposito",  "Sterling", "Shapiro", "Harold",  "Apt"};
    static const std::vector<std::string> words = {
        "Data",   "Web",    "XML",     "Logic", "Query", "Prolog",
        "Trees",  "Paths",  "Records", "Index", "Rules", "Facts"};
    static const std::vector<std::string> reviews = {"good", "Good", "Very good",
                                                     "bad", "fine"};

    std::mt19937_64 rng(seed);
    auto pick = [&](const std::vector<std::string>& v) -> const std::string& {
        return v[rng() % v.size()];
    };

    std::string out = "<books>";
    int n = 0;
    while (out.size() < target_bytes) {
        ++n;
        int year = 1990 + static_cast<int>(rng() % 20);
        bool variant = rng() % 10 == 0;
        if (variant) {
            out += "<book2 year=\"" + std::to_string(year) + "\">";
            out += "<author english=\"yes\">";
            out += pick(authors);
            out += "<name>" + pick(authors) + "</name></author>";
            out += "<title>" + pick(words) + " " + pick(words) + "</title>";
            out += "<review2>" + pick(reviews) + "</review2>";
            out += "</book2>";
        } else {
            out += "<book year=\"" + std::to_string(year) + "\">";
            int na = 1 + static_cast<int>(rng() % 3);
            for (int a = 0; a < na; ++a)
                out += "<author>" + pick(authors) + "</author>";
            out += "<title>" + pick(words) + " " + pick(words) + " " +
                   std::to_string(n) + "</title>";
            if (rng() % 7 == 0)
                out += "<review>A <em>" + pick(reviews) + "</em> book.</review>";
            else
                out += "<review>" + pick(reviews) + "</review>";
            out += "</book>";
        }
    }
    out += "</books>";
    return out;
}

} // namespace xlq
