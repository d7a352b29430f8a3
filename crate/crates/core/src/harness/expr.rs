use evalexpr::{
    build_operator_tree, ContextWithMutableFunctions, ContextWithMutableVariables, DefaultNumericTypes, Function,
    HashMapContext, Node, Value,
};

use crate::error::{Error, Result};

type Ctx = HashMapContext<DefaultNumericTypes>;

/// A scalar expression in `x`, e.g. `"0.2 + 0.1*cos(3.0*x)"`.
///
/// Available functions: `sin cos tan sinh cosh tanh sech exp ln sqrt abs`,
/// and the constant `pi`. Integer literals divide as integers, so write
/// real constants with a decimal point.
pub struct ScalarExpr {
    source: String,
    tree: Node<DefaultNumericTypes>,
}

fn unary(ctx: &mut Ctx, name: &str, f: fn(f64) -> f64) {
    ctx.set_function(
        name.to_string(),
        Function::new(move |arg: &Value<DefaultNumericTypes>| Ok(Value::Float(f(arg.as_number()?)))),
    )
    .expect("hash map context accepts functions");
}

fn context(x: f64) -> Ctx {
    let mut ctx = Ctx::new();
    unary(&mut ctx, "sin", f64::sin);
    unary(&mut ctx, "cos", f64::cos);
    unary(&mut ctx, "tan", f64::tan);
    unary(&mut ctx, "sinh", f64::sinh);
    unary(&mut ctx, "cosh", f64::cosh);
    unary(&mut ctx, "tanh", f64::tanh);
    unary(&mut ctx, "sech", |v| 1.0 / v.cosh());
    unary(&mut ctx, "exp", f64::exp);
    unary(&mut ctx, "ln", f64::ln);
    unary(&mut ctx, "sqrt", f64::sqrt);
    unary(&mut ctx, "abs", f64::abs);
    ctx.set_value("pi".into(), Value::Float(std::f64::consts::PI))
        .expect("hash map context accepts values");
    ctx.set_value("x".into(), Value::Float(x))
        .expect("hash map context accepts values");
    ctx
}

impl ScalarExpr {
    pub fn parse(source: &str) -> Result<Self> {
        let tree = build_operator_tree::<DefaultNumericTypes>(source)
            .map_err(|e| Error::Argument(format!("cannot parse `{source}`: {e}")))?;
        let expr = ScalarExpr {
            source: source.to_string(),
            tree,
        };
        expr.eval(0.0)?;
        Ok(expr)
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        self.tree
            .eval_number_with_context(&context(x))
            .map_err(|e| Error::Argument(format!("cannot evaluate `{}` at x = {x}: {e}", self.source)))
    }
}
