//! Persistent, unbalanced binary search trees.
//!
//! Updates copy the path from the root and share every untouched subtree, so
//! old versions stay valid and trees can be handed across threads. Duplicates
//! are never stored. All traversals are iterative because a tree fed with
//! ascending values degenerates into a list.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

pub struct SearchTree<T> {
    root: Option<Arc<Node<T>>>,
}

struct Node<T> {
    value: T,
    left: SearchTree<T>,
    right: SearchTree<T>,
}

impl<T> Clone for SearchTree<T> {
    fn clone(&self) -> Self {
        SearchTree {
            root: self.root.clone(),
        }
    }
}

impl<T> Default for SearchTree<T> {
    fn default() -> Self {
        SearchTree { root: None }
    }
}

impl<T: fmt::Debug> fmt::Debug for SearchTree<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl<T> Drop for SearchTree<T> {
    fn drop(&mut self) {
        let mut stack: Vec<Arc<Node<T>>> = self.root.take().into_iter().collect();
        while let Some(n) = stack.pop() {
            if let Ok(mut node) = Arc::try_unwrap(n) {
                stack.extend(node.left.root.take());
                stack.extend(node.right.root.take());
            }
        }
    }
}

enum Side {
    Left,
    Right,
}

fn node<T>(value: T, left: SearchTree<T>, right: SearchTree<T>) -> SearchTree<T> {
    SearchTree {
        root: Some(Arc::new(Node { value, left, right })),
    }
}

impl<T> SearchTree<T> {
    pub fn new() -> Self {
        SearchTree { root: None }
    }

    pub fn is_empty(&self) -> bool {
        self.root.is_none()
    }

    /// In-order traversal.
    pub fn iter(&self) -> Iter<'_, T> {
        let mut it = Iter { stack: Vec::new() };
        it.push_left(self);
        it
    }

    pub fn len(&self) -> usize {
        self.iter().count()
    }

    pub fn depth(&self) -> usize {
        let mut deepest = 0;
        let mut stack = vec![(self, 0)];
        while let Some((t, d)) = stack.pop() {
            if let Some(n) = &t.root {
                deepest = deepest.max(d + 1);
                stack.push((&n.left, d + 1));
                stack.push((&n.right, d + 1));
            }
        }
        deepest
    }
}

impl<T: Ord + Clone> SearchTree<T> {
    /// A new version holding `value` as well. Adding a present value returns
    /// a tree sharing all of `self`.
    pub fn add(&self, value: T) -> Self {
        let mut path: Vec<(&Node<T>, Side)> = Vec::new();
        let mut cur = self;
        while let Some(n) = &cur.root {
            match value.cmp(&n.value) {
                Ordering::Equal => return self.clone(),
                Ordering::Less => {
                    path.push((n, Side::Left));
                    cur = &n.left;
                }
                Ordering::Greater => {
                    path.push((n, Side::Right));
                    cur = &n.right;
                }
            }
        }
        rebuild(path, node(value, SearchTree::new(), SearchTree::new()))
    }

    /// The minimum together with the tree without it; `(default, empty)` for
    /// the empty tree.
    pub fn split_min(&self, default: T) -> (T, Self) {
        let Some(mut cur) = self.root.as_deref() else {
            return (default, SearchTree::new());
        };
        let mut path: Vec<(&Node<T>, Side)> = Vec::new();
        while let Some(l) = cur.left.root.as_deref() {
            path.push((cur, Side::Left));
            cur = l;
        }
        (cur.value.clone(), rebuild(path, cur.right.clone()))
    }

    pub fn contains(&self, value: &T) -> bool {
        let mut cur = self;
        while let Some(n) = &cur.root {
            cur = match value.cmp(&n.value) {
                Ordering::Equal => return true,
                Ordering::Less => &n.left,
                Ordering::Greater => &n.right,
            };
        }
        false
    }

    /// The search-tree property: the in-order sequence is strictly increasing.
    pub fn is_search_tree(&self) -> bool {
        let mut it = self.iter();
        let Some(mut prev) = it.next() else {
            return true;
        };
        for v in it {
            if prev >= v {
                return false;
            }
            prev = v;
        }
        true
    }
}

fn rebuild<T: Clone>(path: Vec<(&Node<T>, Side)>, mut sub: SearchTree<T>) -> SearchTree<T> {
    for (n, side) in path.into_iter().rev() {
        sub = match side {
            Side::Left => node(n.value.clone(), sub, n.right.clone()),
            Side::Right => node(n.value.clone(), n.left.clone(), sub),
        };
    }
    sub
}

impl<T: Ord + Clone> FromIterator<T> for SearchTree<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        iter.into_iter().fold(SearchTree::new(), |t, v| t.add(v))
    }
}

pub struct Iter<'a, T> {
    stack: Vec<&'a Node<T>>,
}

impl<'a, T> Iter<'a, T> {
    fn push_left(&mut self, mut t: &'a SearchTree<T>) {
        while let Some(n) = t.root.as_deref() {
            self.stack.push(n);
            t = &n.left;
        }
    }
}

impl<'a, T> Iterator for Iter<'a, T> {
    type Item = &'a T;

    fn next(&mut self) -> Option<&'a T> {
        let n = self.stack.pop()?;
        self.push_left(&n.right);
        Some(&n.value)
    }
}
