#include "vpr/templates.hpp"

#include <fstream>
#include <sstream>

#include <vpr/templates_gen.hpp>

#include "vpr/errors.hpp"

namespace vpr {

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read template file: " + path);
    std::ostringstream out;
    out << in.rdbuf();
    std::string text = out.str();
    if (!text.empty() && text.back() == '\n') text.pop_back();
    return text;
}

}  // namespace

TemplateSet TemplateSet::builtin() {
    return TemplateSet{tpl::kRouter,   tpl::kPolicy,    tpl::kRefiner,
                       tpl::kAtomizer, tpl::kValidator, tpl::kReviser};
}

TemplateSet TemplateSet::load_dir(const std::string& dir) {
    return TemplateSet{read_file(dir + "/router.txt"),    read_file(dir + "/policy.txt"),
                       read_file(dir + "/refiner.txt"),   read_file(dir + "/atomizer.txt"),
                       read_file(dir + "/validator.txt"), read_file(dir + "/reviser.txt")};
}

std::string fill_template(std::string_view tpl,
                          const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(tpl.size());
    for (std::size_t i = 0; i < tpl.size();) {
        const char c = tpl[i];
        if (c == '{') {
            if (i + 1 < tpl.size() && tpl[i + 1] == '{') {
                out += '{';
                i += 2;
                continue;
            }
            const auto close = tpl.find('}', i + 1);
            const auto open = tpl.find('{', i + 1);
            if (close != std::string_view::npos &&
                (open == std::string_view::npos || close < open)) {
                const auto it = values.find(std::string(tpl.substr(i + 1, close - i - 1)));
                if (it != values.end()) {
                    out += it->second;
                    i = close + 1;
                    continue;
                }
            }
            out += '{';
            ++i;
            continue;
        }
        if (c == '}' && i + 1 < tpl.size() && tpl[i + 1] == '}') {
            out += '}';
            i += 2;
            continue;
        }
        out += c;
        ++i;
    }
    return out;
}

}  // namespace vpr
