fn main() {
    std::process::exit(hermite_ocp::cli::main_with_std_io());
}
