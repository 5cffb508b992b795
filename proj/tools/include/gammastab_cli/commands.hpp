#pragma once

// Command-line front end. Kept as a library so the tests can drive it
// in-process.

#include <iosfwd>
#include <string>
#include <vector>

#include "gammastab/gamma_synthesis.hpp"
#include "gammastab_cli/config.hpp"

namespace gammastab::cli {

/// args[0] is the program name. Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

json certificate_to_json(const IosCertificate& cert);
IosCertificate certificate_from_json(const json& j, const std::string& path);
json closed_loop_to_json(const ClosedLoop& loop);
ClosedLoop closed_loop_from_json(const json& j, const std::string& path);
json check_to_json(const CertificateCheck& chk);

}  // namespace gammastab::cli
