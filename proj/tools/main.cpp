// placeholder so the tree configures while the library comes up; the real
// CLI lands with the training/eval subcommands
#include <cstdio>

int main() {
    std::puts("taskcodec: not wired up yet");
    return 1;
}
