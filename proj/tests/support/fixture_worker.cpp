// Protocol worker over stdin/stdout backed by a mock subject.
//   fixture_worker <subject>

#include <unistd.h>

#include <iostream>
#include <string>

#include "mock_subject.hpp"

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: fixture_worker <subject>\n";
    return 2;
  }
  auto subject = ancheck::mock::make_subject(argv[1]);
  std::string line;
  while (std::getline(std::cin, line)) {
    const ancheck::Reply r = subject->handle(line);
    switch (r.kind) {
      case ancheck::Reply::Kind::Line:
        std::cout << r.line << "\n" << std::flush;
        break;
      case ancheck::Reply::Kind::Hang:
        for (;;) ::pause();
      case ancheck::Reply::Kind::Die:
        ::_exit(1);
    }
    try {
      if (ancheck::decode_request(line).op == ancheck::Op::Shutdown) break;
    } catch (const ancheck::DecodeError&) {
    }
  }
  return 0;
}
