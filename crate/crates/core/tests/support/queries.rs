/// Mixed text and math queries over `fixtures/corpus.jsonl`.
pub const REGRESSION: [&str; 20] = [
    "$E=mc^2$",
    "energy",
    "mass energy $E=mc^2$",
    "$a^2+b^2=c^2$",
    "pythagorean triples",
    "$x^2+px+q=0$",
    "differential equations",
    "$\\frac{dy}{dx}=ky$",
    "$e^{i\\pi}+1=0$",
    "quotient groups $G/N$",
    "$\\sqrt{2}$",
    "<math><mi>E</mi><mo>=</mo><mi>m</mi><msup><mi>c</mi><mn>2</mn></msup></math>",
    "$c^2$",
    "$x_i^2$",
    "inequality $ab \\leq \\frac{a^2+b^2}{2}$",
    "$\\sum_{i=1}^{n} i^2$",
    "heat equation $u_{xx}$",
    "$f(x)=x^3-x$",
    "relativity $mc^2$ energy",
    "$\\foo$ cubic polynomial",
];
