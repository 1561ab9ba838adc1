use super::Graph;

const UNVISITED: usize = usize::MAX;

/// Tarjan's algorithm (iterative) over the subgraph of edges accepted by `keep`
/// (called with the global edge index). Returns a component label per node and the
/// number of components; labels are assigned in completion order.
pub fn strongly_connected_components(
    g: &Graph,
    mut keep: impl FnMut(usize) -> bool,
) -> (Vec<usize>, usize) {
    let n = g.node_count();
    let (offsets, targets, edge_ids) = g.csr();
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![UNVISITED; n];
    let mut stack = Vec::new();
    let mut call: Vec<(usize, usize)> = Vec::new();
    let mut next_index = 0;
    let mut comps = 0;

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;
        call.push((root, offsets[root]));

        while let Some(frame) = call.last_mut() {
            let v = frame.0;
            if frame.1 < offsets[v + 1] {
                let pos = frame.1;
                frame.1 += 1;
                if !keep(edge_ids[pos]) {
                    continue;
                }
                let w = targets[pos];
                if index[w] == UNVISITED {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, offsets[w]));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w] = false;
                        comp[w] = comps;
                        if w == v {
                            break;
                        }
                    }
                    comps += 1;
                }
            }
        }
    }
    (comp, comps)
}

/// Node set (sorted) of the largest strongly connected component. Ties go to the
/// component holding the smallest node id.
pub fn largest_scc(g: &Graph) -> Vec<usize> {
    let (comp, count) = strongly_connected_components(g, |_| true);
    if count == 0 {
        return Vec::new();
    }
    let mut sizes = vec![0usize; count];
    let mut first = vec![usize::MAX; count];
    for (v, &c) in comp.iter().enumerate() {
        sizes[c] += 1;
        first[c] = first[c].min(v);
    }
    let best = (0..count)
        .max_by(|&a, &b| sizes[a].cmp(&sizes[b]).then(first[b].cmp(&first[a])))
        .unwrap();
    (0..g.node_count()).filter(|&v| comp[v] == best).collect()
}
