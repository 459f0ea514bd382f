//! Prints the syntax tree of a C file, one node per line.

use blockoff::frontend::{parse_file, AstNode};

fn print(node: &AstNode, src: &str, depth: usize) {
    let text: String = node.text(src).chars().take(50).collect::<String>().replace('\n', " ");
    println!("{:indent$}{:?} {} {:?} `{}`", "", node.kind, node.span, node.name.as_deref().unwrap_or(""), text, indent = depth * 2);
    for c in &node.children {
        print(c, src, depth + 1);
    }
}

fn main() {
    let path = std::env::args().nth(1).expect("usage: dump_ast <file.c>");
    let unit = parse_file(path.as_ref()).unwrap_or_else(|e| panic!("{e}"));
    print(&unit.root, &unit.text, 0);
}
