#pragma once

#include <filesystem>
#include <string>

namespace agwo {

/// A frozen text resource. The hash pins it for the lifetime of a run.
struct Resource {
    std::string name;
    std::string version;
    std::string text;
    std::string sha256;  // hex of `text`
};

/// Judge rubric shipped with the library (core/resources/judge_prompt_v1.txt).
const Resource& builtin_judge_prompt();
/// Prompt-editing instruction (core/resources/adaptation_instruction_v1.txt).
const Resource& builtin_adaptation_instruction();

/// Loads a user-supplied replacement; version is taken from the file name.
Resource load_resource(const std::filesystem::path& path);

std::string sha256_hex(const std::string& data);

} // namespace agwo
