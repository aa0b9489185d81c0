fn main() {
    std::process::exit(dpc_core::cli::cli_main(std::env::args_os()));
}
