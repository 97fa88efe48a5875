#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace g2lab::cli {

// Runs one subcommand; args exclude the program name. Returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// "key = value" lines; '#' starts a comment.
std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text);

// Removes --config FILE from args and splices the file's settings in front of
// the subcommand's own flags, so flags given on the command line win.
std::vector<std::string> expand_config(const std::vector<std::string>& args);

// "0.4,0.2,0.1" (commas and/or whitespace)
std::vector<double> parse_number_list(const std::string& s);

}  // namespace g2lab::cli
