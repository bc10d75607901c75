#include "ncalc/report.hpp"

namespace ncalc {

uint64_t fnv1a64(std::string_view bytes) {
    uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string digest_string(std::string_view bytes) {
    static const char* hex = "0123456789abcdef";
    uint64_t h = fnv1a64(bytes);
    std::string out = "fnv1a64:";
    for (int i = 15; i >= 0; --i)
        out.push_back(hex[(h >> (4 * i)) & 0xf]);
    return out;
}

nlohmann::json Report::to_json() const {
    nlohmann::json j;
    j["command"] = command;
    j["inputs"] = inputs;
    j["outcome"] = outcome;
    j["witnesses"] = witnesses;
    return j;
}

std::string Report::render() const { return to_json().dump(2) + "\n"; }

} // namespace ncalc
