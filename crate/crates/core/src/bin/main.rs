fn main() {
    let code = noodl::harness::run_cli(std::env::args_os(), &mut std::io::stdout().lock());
    std::process::exit(code);
}
