fn main() {
    std::process::exit(coexist_cli::main_from_env());
}
