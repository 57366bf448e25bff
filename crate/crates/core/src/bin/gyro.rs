fn main() {
    std::process::exit(gyroscope::experiment::cli::main_with_args(
        std::env::args_os(),
    ));
}
