#include <iostream>

#include <copmarkov/copula.hpp>

int main() {
    const auto spec = copmarkov::CopulaSpec::gumbel(2.0);
    std::cout << "tau " << copmarkov::kendall_tau(spec) << "\n";
    return 0;
}
