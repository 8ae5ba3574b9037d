fn main() {
    std::process::exit(stable_kolmogorov::experiment::main_with_args(std::env::args_os()));
}
