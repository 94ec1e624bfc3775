//! The `tiergram` command line, as a library so it can be driven in tests.
//!
//! Exit codes: 0 for success or acceptance, 1 for rejection or a parse
//! error, 2 for usage, grammar, lexing and I/O errors.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser as ClapParser, Subcommand, ValueEnum};

use tiergram::lexer::dump_line;
use tiergram::regular::to_char_regex;
use tiergram::testkit::{enumerate_language, MAX_ENUMERATION_LEN};
use tiergram::{
    load_grammar, render_tree, to_regex, to_regular_cfg, Checker, EventHandler, GrammarTables, LexMode, Lexer,
    NodeEnd, Parser, TierGrammar, Token, TreeFormat,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_REJECT: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, ClapParser)]
#[command(name = "tiergram", version, about = "Lex, parse and check data against tier grammars")]
pub struct CliConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Grammar file operations.
    Grammar {
        #[command(subcommand)]
        action: GrammarAction,
    },
    /// Print the token stream: name, start, end and lexeme per line.
    Lex(LexArgs),
    /// Parse input into a tree document or an event stream.
    Parse(ParseArgs),
    /// Decide membership with the local conditions; prints the violation.
    Check(LexArgs),
    /// Print the generated productions with FIRST and FOLLOW sets.
    Tables(GrammarArg),
    /// Print the language of a bracket-free grammar as a regular expression.
    ExportRegex {
        #[command(flatten)]
        grammar: GrammarArg,
        /// Use each token's single-character pattern instead of its name.
        #[arg(long)]
        chars: bool,
    },
    /// Print the language as one regular right-hand side for `S`.
    ExportRegularCfg(GrammarArg),
    /// Print every member up to a length, one per line.
    Enumerate {
        #[command(flatten)]
        grammar: GrammarArg,
        #[arg(long)]
        max_len: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum GrammarAction {
    /// Check a grammar file, including its token patterns.
    Validate { grammar: PathBuf },
}

#[derive(Debug, Args)]
pub struct GrammarArg {
    /// Grammar file (JSON).
    #[arg(short, long)]
    pub grammar: PathBuf,
}

#[derive(Debug, Args)]
pub struct LexArgs {
    #[command(flatten)]
    pub grammar: GrammarArg,
    /// Turn unmatched text into OTHER tokens, parsed as base terminals.
    #[arg(long)]
    pub lenient: bool,
    /// Input file, or `-` for stdin.
    #[arg(default_value = "-")]
    pub input: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Json,
    Sexpr,
}

#[derive(Debug, Args)]
pub struct ParseArgs {
    #[command(flatten)]
    pub input: LexArgs,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Stream one event per line instead of building a tree.
    #[arg(long, conflicts_with = "format")]
    pub events: bool,
    /// Output file instead of stdout.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

/// A failure with its exit code; the message goes to stderr.
struct Failure {
    code: i32,
    message: String,
}

fn error(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_ERROR,
        message: message.into(),
    }
}

fn reject(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_REJECT,
        message: message.into(),
    }
}

fn io_error(what: &Path, e: io::Error) -> Failure {
    error(format!("{}: {e}", what.display()))
}

type Outcome = Result<(), Failure>;

/// Runs the command line `args` (program name first) and returns the exit
/// code.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let config = match CliConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    match execute(config.command, stdin, stdout) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            if !f.message.is_empty() {
                let _ = writeln!(stderr, "{}", f.message);
            }
            f.code
        }
    }
}

fn read_grammar(path: &Path) -> Result<TierGrammar, Failure> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let g = load_grammar(&text).map_err(|e| error(format!("{}: {e}", path.display())))?;
    Lexer::new(&g.tokens).map_err(|e| error(format!("{}: {e}", path.display())))?;
    Ok(g)
}

fn read_input(path: &Path, stdin: &mut dyn Read) -> Result<String, Failure> {
    let mut text = String::new();
    if path == Path::new("-") {
        stdin.read_to_string(&mut text).map_err(|e| io_error(Path::new("<stdin>"), e))?;
    } else {
        text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    }
    Ok(text)
}

/// Grammar (with `OTHER` in lenient mode) and the input's tokens.
fn lex_input(args: &LexArgs, stdin: &mut dyn Read) -> Result<(TierGrammar, Vec<Token>), Failure> {
    let mut g = read_grammar(&args.grammar.grammar)?;
    let mode = if args.lenient {
        g = g.with_implicit_other();
        LexMode::Lenient
    } else {
        LexMode::Strict
    };
    let text = read_input(&args.input, stdin)?;
    let lexer = Lexer::new(&g.tokens).map_err(|e| error(e.to_string()))?;
    let tokens = lexer.tokenize(&text, mode).map_err(|e| error(e.to_string()))?;
    Ok((g, tokens))
}

fn out_err(e: io::Error) -> Failure {
    error(format!("writing output: {e}"))
}

fn execute(command: Command, stdin: &mut dyn Read, stdout: &mut dyn Write) -> Outcome {
    match command {
        Command::Grammar {
            action: GrammarAction::Validate { grammar },
        } => {
            let g = read_grammar(&grammar)?;
            writeln!(
                stdout,
                "valid: {} tokens, {} marker tiers, {} operator tiers",
                g.tokens.len(),
                g.marker_tier_count(),
                g.operator_tier_count()
            )
            .map_err(out_err)
        }
        Command::Lex(args) => {
            let (_, tokens) = lex_input(&args, stdin)?;
            for t in &tokens {
                writeln!(stdout, "{}", dump_line(t)).map_err(out_err)?;
            }
            Ok(())
        }
        Command::Parse(args) => parse(args, stdin, stdout),
        Command::Check(args) => {
            let (g, tokens) = lex_input(&args, stdin)?;
            match Checker::new(&g).check(&tokens) {
                Ok(()) => Ok(()),
                Err(v) => {
                    writeln!(stdout, "{v}").map_err(out_err)?;
                    Err(reject(String::new()))
                }
            }
        }
        Command::Tables(GrammarArg { grammar }) => {
            let g = read_grammar(&grammar)?;
            let tables = GrammarTables::build(&g).map_err(|e| error(e.to_string()))?;
            write!(stdout, "{}", tables.render()).map_err(out_err)
        }
        Command::ExportRegex { grammar, chars } => {
            let g = read_grammar(&grammar.grammar)?;
            let text = if chars {
                to_char_regex(&g)
            } else {
                to_regex(&g).map(|r| r.to_string())
            }
            .map_err(|e| error(e.to_string()))?;
            writeln!(stdout, "{text}").map_err(out_err)
        }
        Command::ExportRegularCfg(GrammarArg { grammar }) => {
            let g = read_grammar(&grammar)?;
            let r = to_regular_cfg(&g).map_err(|e| error(e.to_string()))?;
            writeln!(stdout, "S -> {r}").map_err(out_err)
        }
        Command::Enumerate { grammar, max_len } => {
            let g = read_grammar(&grammar.grammar)?;
            if max_len > MAX_ENUMERATION_LEN {
                return Err(error(format!("--max-len is limited to {MAX_ENUMERATION_LEN}")));
            }
            let members = enumerate_language(&g, max_len).map_err(|e| error(e.to_string()))?;
            let mut members: Vec<_> = members.into_iter().collect();
            members.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
            for m in members {
                let line = if m.is_empty() { "<empty>".to_string() } else { m.join(" ") };
                writeln!(stdout, "{line}").map_err(out_err)?;
            }
            Ok(())
        }
    }
}

/// Writes one line per event.
struct EventWriter<'w> {
    out: &'w mut dyn Write,
    error: Option<io::Error>,
}

impl EventWriter<'_> {
    fn line(&mut self, args: std::fmt::Arguments<'_>) {
        if self.error.is_none() {
            if let Err(e) = self.out.write_fmt(args).and_then(|_| self.out.write_all(b"\n")) {
                self.error = Some(e);
            }
        }
    }
}

fn token_field(t: &Token) -> String {
    format!("{}@{}", t.name, t.span.start)
}

impl EventHandler for EventWriter<'_> {
    fn on_base(&mut self, t: Token) {
        self.line(format_args!("base\t{}", dump_line(&t)));
    }

    fn on_open(&mut self, t: Token) {
        self.line(format_args!("open\t{}", dump_line(&t)));
    }

    fn on_close(&mut self, t: Token) {
        self.line(format_args!("close\t{}", dump_line(&t)));
    }

    fn on_node_end(&mut self, node: NodeEnd) {
        let kind = match node.priority {
            0 => node.kind.to_string(),
            p => format!("{}:{p}", node.kind),
        };
        let ops: Vec<String> = node.operators.iter().map(token_field).collect();
        self.line(format_args!("node\t{kind}\t{}\t{}", node.child_count, ops.join(" ")));
    }

    fn on_end(&mut self) {
        self.line(format_args!("end"));
    }
}

fn parse(args: ParseArgs, stdin: &mut dyn Read, stdout: &mut dyn Write) -> Outcome {
    let (g, tokens) = lex_input(&args.input, stdin)?;
    let parser = Parser::new(&g).map_err(|e| error(e.to_string()))?;
    let mut file;
    let out: &mut dyn Write = match &args.output {
        Some(path) => {
            file = io::BufWriter::new(fs::File::create(path).map_err(|e| io_error(path, e))?);
            &mut file
        }
        None => stdout,
    };
    if args.events {
        let mut writer = EventWriter { out, error: None };
        let result = parser.parse_events(&tokens, &mut writer);
        if let Some(e) = writer.error {
            return Err(out_err(e));
        }
        result.map_err(|e| reject(e.to_string()))?;
        return out.flush().map_err(out_err);
    }
    let tree = parser.parse(&tokens).map_err(|e| reject(e.to_string()))?;
    let format = match args.format {
        Format::Json => TreeFormat::Json,
        Format::Sexpr => TreeFormat::Sexpr,
    };
    writeln!(out, "{}", render_tree(&tree, format)).map_err(out_err)?;
    out.flush().map_err(out_err)
}
