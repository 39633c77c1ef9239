use std::process;

fn main() {
    process::exit(snowroad_cli::cli_main(std::env::args_os()));
}
