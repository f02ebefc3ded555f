#include <exception>
#include <iostream>

#include <CLI11.hpp>

#include "bicr/errors.hpp"
#include "commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Design and evaluate cluster-randomized experiments on bipartite interference graphs",
               "bicr"};
  app.require_subcommand(1);
  bicr::cli::register_commands(app);
  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const bicr::ArgumentError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const bicr::ResourceError& e) {
    std::cerr << "resource error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
