fn main() {
    std::process::exit(otgeom::cli::main_with_args(std::env::args_os()));
}
