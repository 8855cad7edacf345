# Two machines share the places {p0} and {p1} around event e
.initial p0
p0 e p1
p1 f p2
p2 x p3
p2 y p4
p3 y p5
p4 x p5
p5 g p0
