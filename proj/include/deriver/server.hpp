#pragma once

#include <memory>
#include <string>

#include "deriver/service.hpp"

namespace httplib { class Server; }

namespace deriver {

/// Registers the session routes on `srv`. The manager must outlive it.
void install_routes(httplib::Server& srv, SessionManager& manager);

/// Blocks serving HTTP until the process is stopped. Returns false when the
/// address cannot be bound.
bool run_server(SessionManager& manager, const std::string& host, int port);

}  // namespace deriver
