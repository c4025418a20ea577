// SPDX-License-Identifier: Apache-2.0
#include "dtcb/cli.hpp"

int main(int argc, char** argv) { return dtcb::cli::run(argc, argv); }
