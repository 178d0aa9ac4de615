fn main() {
    std::process::exit(teamplan_cli::run(std::env::args_os()));
}
