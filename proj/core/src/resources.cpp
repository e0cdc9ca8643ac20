#include "agwo/resources.hpp"

#include "agwo/error.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <sstream>

namespace agwo {

namespace embedded {
extern const char* const judge_prompt_v1;
extern const char* const adaptation_instruction_v1;
} // namespace embedded

std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw Error("SHA-256 failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

namespace {

Resource make(std::string name, std::string version, std::string text) {
    Resource r{std::move(name), std::move(version), std::move(text), {}};
    r.sha256 = sha256_hex(r.text);
    return r;
}

} // namespace

const Resource& builtin_judge_prompt() {
    static const Resource r = make("judge_prompt", "v1", embedded::judge_prompt_v1);
    return r;
}

const Resource& builtin_adaptation_instruction() {
    static const Resource r = make("adaptation_instruction", "v1", embedded::adaptation_instruction_v1);
    return r;
}

Resource load_resource(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read resource " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    auto stem = path.stem().string();
    std::string version = "custom";
    if (auto pos = stem.rfind("_v"); pos != std::string::npos) {
        version = stem.substr(pos + 1);
        stem = stem.substr(0, pos);
    }
    return make(stem, version, ss.str());
}

} // namespace agwo
